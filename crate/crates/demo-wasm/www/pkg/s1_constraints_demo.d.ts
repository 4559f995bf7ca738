/* tslint:disable */
/* eslint-disable */

/**
 * Solves `Δv = (4r²−4)e^{−r²}` on `n_r` radial nodes and reports the error
 * against `e^{−r²}`.
 */
export function poisson_check(n_r: number): string;

/**
 * Solves for a `u̇`, `u` pair of unit-width bumps a distance `separation` apart.
 */
export function solve(amp: number, separation: number, b: number): string;

/**
 * `α/a²` and `ρ/a²` over amplitudes `a = k·max_amp/steps`, `k = 1..=steps`.
 */
export function sweep(max_amp: number, steps: number, separation: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly poisson_check: (a: number) => [number, number, number, number];
    readonly solve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sweep: (a: number, b: number, c: number) => [number, number, number, number];
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
