/* tslint:disable */
/* eslint-disable */

export class EsdComparison {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    adjusted(): Float64Array;
    iid(): Float64Array;
    raw(): Float64Array;
    readonly a_hat: number;
    readonly b_hat: number;
    readonly raw_dist: number;
    readonly tv_dist: number;
}

export class MpCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    density(): Float64Array;
    /**
     * Support intervals as `[left0, right0, left1, right1, ...]`.
     */
    edges(): Float64Array;
    x(): Float64Array;
    readonly zero_mass: number;
}

export class ShrinkDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    raw_spectrum(): Float64Array;
    truth(): Float64Array;
    tv_spectrum(): Float64Array;
    readonly raw_frob: number;
    readonly sample_frob: number;
    readonly tv_frob: number;
}

/**
 * Sorted eigenvalues of the raw, adjusted and paired i.i.d. sample
 * covariances of one simulated panel.
 */
export function compare_esd(p: number, n: number, a: number, b: number, rho: number, seed: bigint, estimate_ab: boolean): EsdComparison;

/**
 * Density of the limiting law for `H = w δ(t1) + (1 - w) δ(t2)` at
 * concentration `y`, on `points` grid points spanning the support.
 */
export function mp_density(y: number, t1: number, t2: number, w: number, points: number): MpCurve;

/**
 * Spectrum estimates (ascending) and Frobenius errors of nonlinear
 * shrinkage applied to the raw and the adjusted sample covariance.
 */
export function shrink(p: number, n: number, a: number, b: number, rho: number, seed: bigint, estimate_ab: boolean): ShrinkDemo;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_esdcomparison_free: (a: number, b: number) => void;
    readonly __wbg_mpcurve_free: (a: number, b: number) => void;
    readonly __wbg_shrinkdemo_free: (a: number, b: number) => void;
    readonly compare_esd: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number) => [number, number, number];
    readonly esdcomparison_a_hat: (a: number) => number;
    readonly esdcomparison_adjusted: (a: number) => [number, number];
    readonly esdcomparison_b_hat: (a: number) => number;
    readonly esdcomparison_iid: (a: number) => [number, number];
    readonly esdcomparison_raw: (a: number) => [number, number];
    readonly esdcomparison_raw_dist: (a: number) => number;
    readonly esdcomparison_tv_dist: (a: number) => number;
    readonly mp_density: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly mpcurve_density: (a: number) => [number, number];
    readonly mpcurve_edges: (a: number) => [number, number];
    readonly mpcurve_x: (a: number) => [number, number];
    readonly mpcurve_zero_mass: (a: number) => number;
    readonly shrink: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number) => [number, number, number];
    readonly shrinkdemo_raw_frob: (a: number) => number;
    readonly shrinkdemo_raw_spectrum: (a: number) => [number, number];
    readonly shrinkdemo_sample_frob: (a: number) => number;
    readonly shrinkdemo_truth: (a: number) => [number, number];
    readonly shrinkdemo_tv_frob: (a: number) => number;
    readonly shrinkdemo_tv_spectrum: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
