/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_forecast_free: (a: number, b: number) => void;
export const describeTopology: (a: number, b: number) => [number, number, number, number];
export const forecast: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const forecast_effectiveRadius: (a: number) => number;
export const forecast_nrmse: (a: number) => number;
export const forecast_prediction: (a: number) => [number, number];
export const forecast_rmse: (a: number) => number;
export const forecast_target: (a: number) => [number, number];
export const mackeyGlass: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
