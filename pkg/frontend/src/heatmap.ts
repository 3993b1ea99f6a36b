// Field-slice heatmap: normalized |p| values to RGBA pixels (dark -> hot).

export function heatmapRGBA(values: number[], nx: number, nz: number): Uint8ClampedArray<ArrayBuffer> {
  if (values.length !== nx * nz) {
    throw new Error(`heatmap size mismatch: ${values.length} values for ${nx}x${nz}`);
  }
  // pixel rows top-to-bottom = decreasing z; columns left-to-right = increasing x
  const out = new Uint8ClampedArray(new ArrayBuffer(nx * nz * 4));
  for (let iz = 0; iz < nz; iz++) {
    for (let ix = 0; ix < nx; ix++) {
      const v = Math.min(Math.max(values[ix * nz + iz], 0), 1);
      const row = nz - 1 - iz;
      const o = (row * nx + ix) * 4;
      out[o] = Math.round(255 * Math.sqrt(v));
      out[o + 1] = Math.round(255 * v * v);
      out[o + 2] = Math.round(80 + 60 * v - 80 * v * v);
      out[o + 3] = 255;
    }
  }
  return out;
}
