/* tslint:disable */
/* eslint-disable */

/**
 * Controls and constraint report of a harmonic protocol.
 */
export function design(f_mhz: number, gamma: number, d_um: number, v_f: number, epsilon: number, t_f_us: number): string;

/**
 * Differential launch report, trajectory and potential snapshots.
 */
export function doublewell(preset: string, epsilon: number, v0: number, t_f_us: number, count: number): string;

/**
 * Exceeded-distance ratio of the dual and sequential protocols.
 */
export function sweep(f_mhz: number, gamma: number, d_um: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly design: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly doublewell: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly sweep: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
