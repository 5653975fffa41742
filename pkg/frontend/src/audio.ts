// Microphone capture and TTS playback.
//
// The waveform level is decorative, fed by client-side mic amplitude; the
// authoritative listening state always comes from server events, so there is
// no double-VAD divergence. Playback interruption is likewise server-driven:
// the client only streams frames and stops local audio when the server says
// playback stopped.

export const FRAME_MS = 20;
export const SAMPLE_RATE = 16_000;
const FRAME_SAMPLES = (SAMPLE_RATE * FRAME_MS) / 1000;

export function floatTo16BitPcm(samples: Float32Array): ArrayBuffer {
  const buffer = new ArrayBuffer(samples.length * 2);
  const out = new DataView(buffer);
  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    out.setInt16(i * 2, Math.round(clamped * 32767), true);
  }
  return buffer;
}

export function levelFromSamples(samples: Float32Array): number {
  if (!samples.length) return 0;
  let sum = 0;
  for (let i = 0; i < samples.length; i++) sum += samples[i] * samples[i];
  return Math.sqrt(sum / samples.length);
}

export interface MicStream {
  stop(): void;
}

export async function startMicStream(
  onFrame: (frame: ArrayBuffer) => void,
  onLevel: (level: number) => void,
): Promise<MicStream> {
  const media = await navigator.mediaDevices.getUserMedia({
    audio: { echoCancellation: true, noiseSuppression: true, channelCount: 1 },
  });
  const ctx = new AudioContext({ sampleRate: SAMPLE_RATE });
  const source = ctx.createMediaStreamSource(media);
  const processor = ctx.createScriptProcessor(1024, 1, 1);
  let pending = new Float32Array(0);
  processor.onaudioprocess = (event) => {
    const input = event.inputBuffer.getChannelData(0);
    onLevel(levelFromSamples(input));
    const joined = new Float32Array(pending.length + input.length);
    joined.set(pending);
    joined.set(input, pending.length);
    let offset = 0;
    while (joined.length - offset >= FRAME_SAMPLES) {
      onFrame(floatTo16BitPcm(joined.subarray(offset, offset + FRAME_SAMPLES)));
      offset += FRAME_SAMPLES;
    }
    pending = joined.slice(offset);
  };
  source.connect(processor);
  processor.connect(ctx.destination);
  return {
    stop() {
      processor.disconnect();
      source.disconnect();
      media.getTracks().forEach((track) => track.stop());
      void ctx.close();
    },
  };
}

export interface TtsPlayer {
  stop(): void;
}

export function playPcm16(audio: ArrayBuffer, sampleRate = SAMPLE_RATE): TtsPlayer {
  const ctx = new AudioContext();
  const ints = new Int16Array(audio);
  const floats = new Float32Array(ints.length);
  for (let i = 0; i < ints.length; i++) floats[i] = ints[i] / 32768;
  const buffer = ctx.createBuffer(1, floats.length, sampleRate);
  buffer.copyToChannel(floats, 0);
  const source = ctx.createBufferSource();
  source.buffer = buffer;
  source.connect(ctx.destination);
  source.start();
  return {
    stop() {
      try {
        source.stop();
      } finally {
        void ctx.close();
      }
    },
  };
}

export function drawWaveformBar(element: HTMLElement, level: number): void {
  const clamped = Math.max(0, Math.min(1, level * 4));
  element.style.setProperty("--level", String(clamped));
  element.classList.toggle("speaking", clamped > 0.08);
}
