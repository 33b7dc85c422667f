/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fusion_free: (a: number, b: number) => void;
export const candidates: (a: number, b: number, c: number, d: number, e: bigint, f: number, g: number) => [number, number, number, number];
export const fuse_and_sweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const fusion_best: (a: number) => [number, number];
export const fusion_fused: (a: number) => [number, number];
export const fusion_sweep: (a: number) => [number, number];
export const grabcut: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const lane_marks: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const scene_height: () => number;
export const scene_rgba: () => [number, number];
export const scene_truth: () => [number, number];
export const scene_width: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
