/* tslint:disable */
/* eslint-disable */

/**
 * An RGBA image ready for `ImageData`.
 */
export class Image {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Blobs found; zero for plain renders.
     */
    readonly blobs: number;
    readonly height: number;
    /**
     * Pixel bytes, four per pixel.
     */
    readonly rgba: Uint8Array;
    readonly width: number;
}

export class TrackResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly accuracy: number;
    readonly frames: number;
    readonly id_switches: number;
    /**
     * The `N,T,Y,X` table.
     */
    readonly ntyx: string;
    readonly tracks: number;
}

export function detectFrame(preset: string, seed: number, t: number, threshold: number, morphology_radius: number, min_blob_area: number): Image;

export function renderFrame(preset: string, seed: number, t: number): Image;

export function sceneLength(preset: string): number;

export function trackScene(preset: string, seed: number, threshold: number, occlusion_limit: number): TrackResult;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_image_free: (a: number, b: number) => void;
    readonly __wbg_trackresult_free: (a: number, b: number) => void;
    readonly detectFrame: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly image_blobs: (a: number) => number;
    readonly image_height: (a: number) => number;
    readonly image_rgba: (a: number) => [number, number];
    readonly image_width: (a: number) => number;
    readonly renderFrame: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly sceneLength: (a: number, b: number) => [number, number, number];
    readonly trackScene: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly trackresult_accuracy: (a: number) => number;
    readonly trackresult_frames: (a: number) => number;
    readonly trackresult_id_switches: (a: number) => number;
    readonly trackresult_ntyx: (a: number) => [number, number];
    readonly trackresult_tracks: (a: number) => number;
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
