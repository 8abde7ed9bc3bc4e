/* tslint:disable */
/* eslint-disable */

export class Fiducial {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Interleaved `re, im` amplitudes.
     */
    amplitudes(): Float64Array;
    /**
     * `|G_{kl}|` from the FFT evaluation, row `k`.
     */
    autocorrelationMatrix(): Float64Array;
    dim(): number;
    frameError(): number;
    maxDeviation(): number;
    /**
     * `|⟨a|D_{lα}|a⟩|²` with row `α`, column `l`.
     */
    overlapMatrix(): Float64Array;
    /**
     * Restarts run before the hit (0 for a known fiducial).
     */
    restartsUsed(): number;
    seconds(): number;
    symmetry(): string;
    /**
     * The fiducial as a `SICFID 1` file.
     */
    toSicfid(): string;
}

/**
 * `qubit`, `hesse` or `norrell`.
 */
export function knownFiducial(name: string): Fiducial;

/**
 * First-hit search in dimension `d` with `restarts` Haar-random starts.
 * `symmetry` is anything the CLI accepts: `none`, `zauner`, `zauner:0`, ...
 */
export function searchFiducial(d: number, seed: bigint, restarts: number, symmetry: string): Fiducial;

/**
 * Dimensions of the three Zauner eigenspaces.
 */
export function zaunerDims(d: number): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fiducial_free: (a: number, b: number) => void;
    readonly fiducial_amplitudes: (a: number) => any;
    readonly fiducial_autocorrelationMatrix: (a: number) => any;
    readonly fiducial_dim: (a: number) => number;
    readonly fiducial_frameError: (a: number) => number;
    readonly fiducial_maxDeviation: (a: number) => number;
    readonly fiducial_overlapMatrix: (a: number) => any;
    readonly fiducial_restartsUsed: (a: number) => number;
    readonly fiducial_seconds: (a: number) => number;
    readonly fiducial_symmetry: (a: number) => [number, number];
    readonly fiducial_toSicfid: (a: number) => [number, number];
    readonly knownFiducial: (a: number, b: number) => [number, number, number];
    readonly searchFiducial: (a: number, b: bigint, c: number, d: number, e: number) => [number, number, number];
    readonly zaunerDims: (a: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
