/* tslint:disable */
/* eslint-disable */

export class Forecast {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Largest effective spectral radius over the reservoirs.
     */
    readonly effectiveRadius: number;
    readonly nrmse: number;
    readonly prediction: Float64Array;
    readonly rmse: number;
    readonly target: Float64Array;
}

/**
 * JSON description of a topology: reservoir count, grid shape (reservoirs
 * are numbered column-major) and the edge list, with `"u"` for the input.
 */
export function describeTopology(topology: string): string;

/**
 * Trains a network on a fresh Mackey-Glass series and forecasts `horizon`
 * steps ahead over the test window.
 */
export function forecast(topology: string, n_r: number, horizon: number, sigma_in: number, alpha: number, ip: boolean, seed: number): Forecast;

/**
 * `n` samples of Mackey-Glass with delay `tau` (a whole number of steps).
 */
export function mackeyGlass(n: number, tau: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_forecast_free: (a: number, b: number) => void;
    readonly describeTopology: (a: number, b: number) => [number, number, number, number];
    readonly forecast: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly forecast_effectiveRadius: (a: number) => number;
    readonly forecast_nrmse: (a: number) => number;
    readonly forecast_prediction: (a: number) => [number, number];
    readonly forecast_rmse: (a: number) => number;
    readonly forecast_target: (a: number) => [number, number];
    readonly mackeyGlass: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
