/* tslint:disable */
/* eslint-disable */

/**
 * Residual of `R π(g) f = c π̂(g) R f` for the exact character, no
 * character, and the inverted character.
 */
export function intertwining(phantom: string, a: number, angle_deg: number, shift: number): string;

/**
 * Plane integrals along one normal, sampled and closed form.
 */
export function plane_profile(phantom: string, theta_deg: number, phi_deg: number): string;

/**
 * Radon transform on `directions²` normals, then FBP or direct Fourier
 * inversion; returns the central z slice of truth and reconstruction.
 */
export function reconstruct(phantom: string, directions: number, method: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly intertwining: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly plane_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly reconstruct: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
