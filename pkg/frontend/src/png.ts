/** Minimal decoder for the grayscale PNGs the service serves.
 *
 * Canvas drawImage flattens 16-bit grayscale to 8 bits, which destroys
 * small integer label values, so label and mask maps are parsed here
 * instead: non-interlaced, color type 0 (grayscale), bit depth 8 or 16.
 */

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major pixel values (0..65535 for 16-bit, 0..255 for 8-bit). */
  data: Uint16Array;
}

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

async function inflate(deflated: Uint8Array): Promise<Uint8Array> {
  const stream = new Blob([deflated as BlobPart])
    .stream()
    .pipeThrough(new DecompressionStream("deflate"));
  return new Uint8Array(await new Response(stream).arrayBuffer());
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

/** Undo per-row PNG filters in place; returns raw bytes without filter tags. */
function unfilter(raw: Uint8Array, height: number, rowBytes: number, bpp: number): Uint8Array {
  const out = new Uint8Array(height * rowBytes);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (rowBytes + 1)]!;
    const src = y * (rowBytes + 1) + 1;
    const dst = y * rowBytes;
    const prev = dst - rowBytes;
    for (let i = 0; i < rowBytes; i++) {
      const x = raw[src + i]!;
      const left = i >= bpp ? out[dst + i - bpp]! : 0;
      const up = y > 0 ? out[prev + i]! : 0;
      const upLeft = y > 0 && i >= bpp ? out[prev + i - bpp]! : 0;
      let value: number;
      switch (filter) {
        case 0:
          value = x;
          break;
        case 1:
          value = x + left;
          break;
        case 2:
          value = x + up;
          break;
        case 3:
          value = x + ((left + up) >> 1);
          break;
        case 4:
          value = x + paeth(left, up, upLeft);
          break;
        default:
          throw new Error(`png: unknown filter type ${filter}`);
      }
      out[dst + i] = value & 0xff;
    }
  }
  return out;
}

export async function decodeGray(bytes: Uint8Array): Promise<GrayImage> {
  if (bytes.length < 8 || PNG_SIGNATURE.some((b, i) => bytes[i] !== b)) {
    throw new Error("png: bad signature");
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  const idat: Uint8Array[] = [];
  let offset = 8;
  while (offset + 8 <= bytes.length) {
    const length = view.getUint32(offset);
    const type = String.fromCharCode(...bytes.subarray(offset + 4, offset + 8));
    const body = bytes.subarray(offset + 8, offset + 8 + length);
    if (type === "IHDR") {
      width = view.getUint32(offset + 8);
      height = view.getUint32(offset + 12);
      bitDepth = body[8]!;
      const colorType = body[9]!;
      const interlace = body[12]!;
      if (colorType !== 0) throw new Error(`png: expected grayscale, got color type ${colorType}`);
      if (bitDepth !== 8 && bitDepth !== 16) throw new Error(`png: unsupported bit depth ${bitDepth}`);
      if (interlace !== 0) throw new Error("png: interlaced images not supported");
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length; // length + type + payload + crc
  }
  if (!width || !height || idat.length === 0) throw new Error("png: missing image data");

  const deflated = new Uint8Array(idat.reduce((n, c) => n + c.length, 0));
  let at = 0;
  for (const chunk of idat) {
    deflated.set(chunk, at);
    at += chunk.length;
  }
  const bpp = bitDepth / 8;
  const rowBytes = width * bpp;
  const raw = await inflate(deflated);
  if (raw.length < height * (rowBytes + 1)) throw new Error("png: truncated pixel data");
  const plain = unfilter(raw, height, rowBytes, bpp);

  const data = new Uint16Array(width * height);
  if (bitDepth === 16) {
    for (let i = 0; i < data.length; i++) {
      data[i] = (plain[2 * i]! << 8) | plain[2 * i + 1]!;
    }
  } else {
    data.set(plain);
  }
  return { width, height, data };
}
