/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_esdcomparison_free: (a: number, b: number) => void;
export const __wbg_mpcurve_free: (a: number, b: number) => void;
export const __wbg_shrinkdemo_free: (a: number, b: number) => void;
export const compare_esd: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number) => [number, number, number];
export const esdcomparison_a_hat: (a: number) => number;
export const esdcomparison_adjusted: (a: number) => [number, number];
export const esdcomparison_b_hat: (a: number) => number;
export const esdcomparison_iid: (a: number) => [number, number];
export const esdcomparison_raw: (a: number) => [number, number];
export const esdcomparison_raw_dist: (a: number) => number;
export const esdcomparison_tv_dist: (a: number) => number;
export const mp_density: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const mpcurve_density: (a: number) => [number, number];
export const mpcurve_edges: (a: number) => [number, number];
export const mpcurve_x: (a: number) => [number, number];
export const mpcurve_zero_mass: (a: number) => number;
export const shrink: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number) => [number, number, number];
export const shrinkdemo_raw_frob: (a: number) => number;
export const shrinkdemo_raw_spectrum: (a: number) => [number, number];
export const shrinkdemo_sample_frob: (a: number) => number;
export const shrinkdemo_truth: (a: number) => [number, number];
export const shrinkdemo_tv_frob: (a: number) => number;
export const shrinkdemo_tv_spectrum: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
