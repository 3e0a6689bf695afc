/* tslint:disable */
/* eslint-disable */

/**
 * Audit a potential radial in (y1..y4); `spec` is `builtin:appendix_d` or `V = ...`.
 */
export function auditPotential(spec: string, dim: number, minus_face: boolean): string;

/**
 * `U_{0,λ}(r)` on `samples` points of `[0, r_max]`.
 */
export function bubbleProfile(dim: number, lambda: number, r_max: number, samples: number): Float64Array;

/**
 * μ* for n = n_min, 2n_min, ..., n_max at the audited critical point, with the fitted exponent.
 */
export function scalingStudy(spec: string, dim: number, n_min: number, n_max: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly auditPotential: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly bubbleProfile: (a: number, b: number, c: number, d: number) => [number, number];
    readonly scalingStudy: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
