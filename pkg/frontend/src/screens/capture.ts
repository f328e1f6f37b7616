/** Capture screen: write, record or attach a voice note, save. This view
 * deliberately contains nothing derived from analysis — the entry is
 * examined later, from the journal, if the writer chooses to look. */

import { ServiceError } from "../api.js";
import type { ScreenContext } from "../ctx.js";
import { clear, el } from "../dom.js";
import { recordingSupported, startRecording, type Recorder } from "../recorder.js";

export function renderCapture(root: HTMLElement, ctx: ScreenContext): void {
  clear(root);

  let audio: Blob | null = null;
  let recorder: Recorder | null = null;

  const textArea = el("textarea", {
    name: "text",
    rows: "5",
    placeholder: "What's on your mind?",
    "aria-label": "Journal text",
  });
  const fileInput = el("input", {
    type: "file",
    accept: "audio/wav,audio/*",
    "aria-label": "Voice note file",
  });
  const audioStatus = el("span", { class: "audio-status", text: "no take yet" });
  const status = el("p", { class: "status", role: "status" });
  const saveButton = el("button", { type: "submit", text: "Save entry" });
  const retryButton = el("button", { type: "button", class: "retry", text: "Retry" });

  const setAudio = (blob: Blob | null, name: string) => {
    audio = blob;
    audioStatus.textContent = name || "no take yet";
  };

  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0] ?? null;
    setAudio(file, file ? file.name : "");
  });

  const recordButton = el("button", { type: "button", text: "Record" });
  recordButton.addEventListener("click", async () => {
    if (recorder) {
      const taken = recorder;
      recorder = null;
      recordButton.textContent = "Record";
      setAudio(await taken.stop(), "microphone take");
      return;
    }
    try {
      recorder = await startRecording();
      recordButton.textContent = "Stop";
    } catch {
      status.textContent = "Microphone unavailable; attach a file instead.";
    }
  });

  const submit = async () => {
    const text = textArea.value.trim();
    if (!text) {
      status.textContent = "Write a few words first.";
      return;
    }
    if (!audio) {
      status.textContent = "Record or attach a voice note first.";
      return;
    }
    saveButton.disabled = true;
    status.textContent = "Saving...";
    retryButton.remove();
    try {
      await ctx.api.createEntry(text, audio);
      ctx.navigate("#/");
    } catch (err) {
      saveButton.disabled = false;
      if (err instanceof ServiceError) {
        status.textContent = `The service turned this entry away: ${err.detail}`;
      } else {
        status.textContent = "Service unreachable. Your draft is kept here.";
        status.after(retryButton);
      }
    }
  };

  retryButton.addEventListener("click", submit);

  const form = el("form", { class: "capture" }, [
    el("h2", { text: "New journal entry" }),
    el("label", {}, ["Your words", textArea]),
    el("div", { class: "audio-row" }, [
      ...(recordingSupported() ? [recordButton] : []),
      fileInput,
      audioStatus,
    ]),
    saveButton,
    status,
  ]);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });

  root.append(form, el("p", {}, [el("a", { href: "#/", text: "Back to journal" })]));
}
