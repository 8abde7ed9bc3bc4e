/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fiducial_free: (a: number, b: number) => void;
export const fiducial_amplitudes: (a: number) => any;
export const fiducial_autocorrelationMatrix: (a: number) => any;
export const fiducial_dim: (a: number) => number;
export const fiducial_frameError: (a: number) => number;
export const fiducial_maxDeviation: (a: number) => number;
export const fiducial_overlapMatrix: (a: number) => any;
export const fiducial_restartsUsed: (a: number) => number;
export const fiducial_seconds: (a: number) => number;
export const fiducial_symmetry: (a: number) => [number, number];
export const fiducial_toSicfid: (a: number) => [number, number];
export const knownFiducial: (a: number, b: number) => [number, number, number];
export const searchFiducial: (a: number, b: bigint, c: number, d: number, e: number) => [number, number, number];
export const zaunerDims: (a: number) => [number, number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
