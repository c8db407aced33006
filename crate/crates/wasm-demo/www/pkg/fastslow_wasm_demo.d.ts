/* tslint:disable */
/* eslint-disable */

/**
 * Rows of `[x, D(x)]` on `n` points of [−x_max, x_max].
 */
export function dawson_curve(x_max: number, n: number): Float64Array;

/**
 * The two special orbits a = −1/(2νD(y)) on `n` points of [−y_max, y_max];
 * the pole at y = 0 is NaN. Rows of `[y, a]`.
 */
export function gamma2_curves(nu: number, y_max: number, n: number): Float64Array;

export function k2_orbit(a: number, delta: number, nu: number, n: number): Float64Array;

export function pi2(a: number, delta: number, nu: number): Float64Array;

/**
 * Unit triangle with gains (2, 1) from (1.5, 1, −2.5) at `y0`.
 */
export function simulate_triangle(y0: number, eps: number, canard: boolean, t_end: number): Float64Array;

/**
 * Rows of `[y, a]` on the slow manifolds a = −√ε/(2νD(y/√ε)); NaN at y = 0.
 */
export function slow_manifold(eps: number, nu: number, y_max: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dawson_curve: (a: number, b: number) => [number, number];
    readonly gamma2_curves: (a: number, b: number, c: number) => [number, number];
    readonly k2_orbit: (a: number, b: number, c: number, d: number) => [number, number];
    readonly pi2: (a: number, b: number, c: number) => [number, number, number, number];
    readonly simulate_triangle: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly slow_manifold: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
