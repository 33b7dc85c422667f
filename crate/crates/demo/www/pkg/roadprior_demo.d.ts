/* tslint:disable */
/* eslint-disable */

export class Fusion {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[t, precision, recall, f1]` at the best F1.
     */
    readonly best: Float64Array;
    /**
     * Fused confidence, round(255·p) per pixel.
     */
    readonly fused: Uint8Array;
    /**
     * Flat `[t, precision, recall, f1]` rows.
     */
    readonly sweep: Float64Array;
}

/**
 * Confidence mask from `n` perturbed poses around a GPS fix that is off
 * by `gps_east` metres and `gps_heading` degrees. Values are round(255·k/n).
 */
export function candidates(n: number, dx: number, dy: number, dtheta: number, seed: bigint, gps_east: number, gps_heading: number): Uint8Array;

/**
 * Fuses whichever scene masks are given (empty slices are skipped; the
 * weights are renormalised over the rest) and sweeps the threshold
 * against the scene truth. Weights are in source order: refined,
 * candidates, GrabCut, lane marks, Lidar.
 */
export function fuse_and_sweep(candidates: Uint8Array, grabcut: Uint8Array, lane_marks: Uint8Array, weights: Float64Array, step: number): Fusion;

/**
 * GrabCut road mask with the default seed rectangles (0 or 255).
 */
export function grabcut(rgba: Uint8Array, width: number, height: number, seed: bigint): Uint8Array;

/**
 * Region between the fitted lane lines (0 or 255); all zero when either
 * side has no line.
 */
export function lane_marks(rgba: Uint8Array, width: number, height: number): Uint8Array;

export function scene_height(): number;

/**
 * The built-in scene as RGBA: sky, asphalt with white edge lines, grass.
 */
export function scene_rgba(): Uint8Array;

/**
 * Ground truth road for the built-in scene, 0 or 255 per pixel.
 */
export function scene_truth(): Uint8Array;

export function scene_width(): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fusion_free: (a: number, b: number) => void;
    readonly candidates: (a: number, b: number, c: number, d: number, e: bigint, f: number, g: number) => [number, number, number, number];
    readonly fuse_and_sweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly fusion_best: (a: number) => [number, number];
    readonly fusion_fused: (a: number) => [number, number];
    readonly fusion_sweep: (a: number) => [number, number];
    readonly grabcut: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly lane_marks: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly scene_height: () => number;
    readonly scene_rgba: () => [number, number];
    readonly scene_truth: () => [number, number];
    readonly scene_width: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
