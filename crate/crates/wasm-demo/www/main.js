import init, { walsh_values, fractal_element, transfer_curve } from "./pkg/fractal_onb_wasm.js";

const $ = (id) => document.getElementById(id);
const list = (s) => s.split(",").map(Number);

function plot(canvas, series, { steps = false, box } = {}) {
  const ctx = canvas.getContext("2d");
  const { x, y, w, h } = box ?? { x: 0, y: 0, w: canvas.width, h: canvas.height };
  const ys = series.map((p) => p[1]).concat([0]);
  const lo = Math.min(...ys), hi = Math.max(...ys);
  const xs = series.map((p) => p[0]);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const sx = (v) => x + 4 + ((v - x0) / (x1 - x0 || 1)) * (w - 8);
  const sy = (v) => y + h - 4 - ((v - lo) / (hi - lo || 1)) * (h - 8);
  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(x, y, w, h);
  ctx.beginPath();
  ctx.moveTo(x, sy(0));
  ctx.lineTo(x + w, sy(0));
  ctx.stroke();
  ctx.strokeStyle = "#1f5fa8";
  ctx.beginPath();
  series.forEach(([a, b], i) => (i ? ctx.lineTo(sx(a), sy(b)) : ctx.moveTo(sx(a), sy(b))));
  ctx.stroke();
}

function guard(errId, f) {
  try {
    $(errId).textContent = "";
    f();
  } catch (e) {
    $(errId).textContent = String(e.message ?? e);
  }
}

function drawWalsh() {
  guard("w-err", () => {
    const v = walsh_values(+$("w-n").value, +$("w-len").value, +$("w-seed").value);
    const [count, cells] = [v[0], v[1]];
    const canvas = $("w-canvas");
    canvas.getContext("2d").clearRect(0, 0, canvas.width, canvas.height);
    const cols = Math.ceil(Math.sqrt(count));
    const w = canvas.width / cols, h = canvas.height / Math.ceil(count / cols);
    for (let k = 0; k < count; k++) {
      const vals = v.subarray(2 + k * cells, 2 + (k + 1) * cells);
      const pts = [];
      vals.forEach((y, i) => pts.push([i / cells, y], [(i + 1) / cells, y]));
      plot(canvas, pts, { box: { x: (k % cols) * w + 2, y: Math.floor(k / cols) * h + 2, w: w - 4, h: h - 4 } });
    }
  });
}

function drawElement() {
  guard("f-err", () => {
    const v = fractal_element(+$("f-r").value, list($("f-b").value), list($("f-l").value), +$("f-len").value, +$("f-idx").value, 2048);
    $("f-idx").max = v[0] - 1;
    $("f-info").textContent = `element ${$("f-idx").value} of ${v[0]}`;
    const pts = [];
    for (let i = 1; i < v.length; i += 2) pts.push([v[i], v[i + 1]]);
    const canvas = $("f-canvas");
    canvas.getContext("2d").clearRect(0, 0, canvas.width, canvas.height);
    const ctx = canvas.getContext("2d");
    const ys = pts.map((p) => p[1]);
    const lo = Math.min(...ys, 0), hi = Math.max(...ys, 0);
    ctx.fillStyle = "#1f5fa8";
    for (const [x, y] of pts) {
      ctx.fillRect(4 + x * (canvas.width - 8) / Math.max(...pts.map((p) => p[0])), canvas.height - 4 - ((y - lo) / (hi - lo || 1)) * (canvas.height - 8), 2, 2);
    }
  });
}

function drawTransfer() {
  guard("t-err", () => {
    const d = transfer_curve(+$("f-r").value, list($("f-b").value), list($("f-l").value), +$("t-amp").value, +$("t-it").value);
    const canvas = $("t-canvas");
    canvas.getContext("2d").clearRect(0, 0, canvas.width, canvas.height);
    plot(canvas, Array.from(d, (v, k) => [k + 1, Math.log10(Math.max(v, 1e-300))]));
  });
}

await init();
$("w-go").onclick = drawWalsh;
$("t-go").onclick = drawTransfer;
for (const id of ["f-r", "f-b", "f-l", "f-len", "f-idx"]) $(id).oninput = drawElement;
drawWalsh();
drawElement();
drawTransfer();
