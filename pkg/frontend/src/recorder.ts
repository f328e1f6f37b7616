/** Microphone capture via Web Audio: raw float frames are collected and
 * encoded locally to PCM16 mono 16 kHz WAV, so uploads never depend on
 * whatever compressed codec the browser's recorder would pick. */

import { encodeWavPcm16Mono } from "./wav.js";

export interface Recorder {
  stop(): Promise<Blob>;
}

export function recordingSupported(): boolean {
  return (
    typeof navigator !== "undefined" &&
    navigator.mediaDevices !== undefined &&
    typeof navigator.mediaDevices.getUserMedia === "function" &&
    typeof AudioContext !== "undefined"
  );
}

export async function startRecording(): Promise<Recorder> {
  const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
  const context = new AudioContext();
  const source = context.createMediaStreamSource(stream);
  const processor = context.createScriptProcessor(4096, 1, 1);
  const chunks: Float32Array[] = [];
  processor.onaudioprocess = (event) => {
    chunks.push(new Float32Array(event.inputBuffer.getChannelData(0)));
  };
  source.connect(processor);
  processor.connect(context.destination);

  return {
    async stop(): Promise<Blob> {
      processor.disconnect();
      source.disconnect();
      for (const track of stream.getTracks()) track.stop();
      const total = chunks.reduce((n, c) => n + c.length, 0);
      const samples = new Float32Array(total);
      let offset = 0;
      for (const chunk of chunks) {
        samples.set(chunk, offset);
        offset += chunk.length;
      }
      const rate = context.sampleRate;
      await context.close();
      return new Blob([encodeWavPcm16Mono(samples, rate)], { type: "audio/wav" });
    },
  };
}
