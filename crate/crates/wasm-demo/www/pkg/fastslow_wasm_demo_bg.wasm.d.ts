/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const dawson_curve: (a: number, b: number) => [number, number];
export const gamma2_curves: (a: number, b: number, c: number) => [number, number];
export const k2_orbit: (a: number, b: number, c: number, d: number) => [number, number];
export const pi2: (a: number, b: number, c: number) => [number, number, number, number];
export const simulate_triangle: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const slow_manifold: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
