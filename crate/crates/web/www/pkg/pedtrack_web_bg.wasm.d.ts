/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_image_free: (a: number, b: number) => void;
export const __wbg_trackresult_free: (a: number, b: number) => void;
export const detectFrame: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const image_blobs: (a: number) => number;
export const image_height: (a: number) => number;
export const image_rgba: (a: number) => [number, number];
export const image_width: (a: number) => number;
export const renderFrame: (a: number, b: number, c: number, d: number) => [number, number, number];
export const sceneLength: (a: number, b: number) => [number, number, number];
export const trackScene: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const trackresult_accuracy: (a: number) => number;
export const trackresult_frames: (a: number) => number;
export const trackresult_id_switches: (a: number) => number;
export const trackresult_ntyx: (a: number) => [number, number];
export const trackresult_tracks: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
