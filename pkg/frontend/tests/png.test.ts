import { describe, expect, it } from "vitest";

import { decodeGray } from "../src/png.js";

// Both fixtures are 16-bit grayscale PNGs produced by the service's own
// encoder; expected pixel values were recorded at generation time.

// 4x3, row-major values 0..9 then 300 and 65535.
const LABELS_B64 =
  "iVBORw0KGgoAAAANSUhEUgAAAAQAAAADEAAAAADBDy1ZAAAAIUlEQVQIHQXBQQ0AIAwAsV7CAx/4VzM/C21IypGUq97OBwRtAgxIsPL+AAAAAElFTkSuQmCC";
const LABELS_VALUES = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 300, 65535];

// 7x5 random 16-bit values; exercises the sum and paeth row filters.
const NOISE_B64 =
  "iVBORw0KGgoAAAANSUhEUgAAAAcAAAAFEAAAAAD8YXVHAAAAVklEQVQIHQFLALT/Ac++Ri8YAg+w8s6fsxFmAZUIdQ4OAj3zGdYxJ9ubAUPJ5RuJHAsNTFEVu1alAWQnfyGhAedDA7E8V+ykASw+kKQF1zMU1Xd/fQkpH6Qbwc4LMiMAAAAASUVORK5CYII=";
const NOISE_VALUES = [
  53182, 5613, 11759, 15519, 11885, 52512, 56966, 38152, 2582, 6168, 21771, 28385, 40712, 31395,
  17353, 10468, 45312, 48141, 2142, 7449, 29630, 25639, 58184, 33865, 27532, 28221, 43668, 38456,
  11326, 48354, 49593, 62669, 51524, 18625, 20970,
];

function fromBase64(b64: string): Uint8Array {
  return new Uint8Array(Buffer.from(b64, "base64"));
}

describe("decodeGray", () => {
  it("decodes a 16-bit label map exactly", async () => {
    const image = await decodeGray(fromBase64(LABELS_B64));
    expect(image.width).toBe(4);
    expect(image.height).toBe(3);
    expect(Array.from(image.data)).toEqual(LABELS_VALUES);
  });

  it("decodes 16-bit noise through all filter types", async () => {
    const image = await decodeGray(fromBase64(NOISE_B64));
    expect(image.width).toBe(7);
    expect(image.height).toBe(5);
    expect(Array.from(image.data)).toEqual(NOISE_VALUES);
  });

  it("rejects data without the png signature", async () => {
    await expect(decodeGray(new Uint8Array([0, 1, 2, 3, 4, 5, 6, 7, 8]))).rejects.toThrow(
      /bad signature/,
    );
  });

  it("rejects non-grayscale color types", async () => {
    const bytes = fromBase64(LABELS_B64);
    // IHDR color type lives at byte 25: 8 signature + 8 chunk header
    // + 4 width + 4 height + 1 bit depth.
    bytes[25] = 2;
    await expect(decodeGray(bytes)).rejects.toThrow(/color type 2/);
  });

  it("rejects a signature with no chunks", async () => {
    const bytes = fromBase64(LABELS_B64).subarray(0, 8);
    await expect(decodeGray(bytes)).rejects.toThrow(/missing image data/);
  });
});
