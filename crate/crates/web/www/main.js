// Build: see the web demo section of the README (wasm-bindgen --target web --out-dir www/pkg).
import init, { ofdm_heatmap, crlb_curves, rate_curves } from "./pkg/jrc_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c"];
const num = (id) => Number(document.getElementById(id).value);

function report(id, text, isError = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = isError ? "err" : "";
}

// Grey-to-yellow ramp over [-40, 0] dB.
function shade(dbValue) {
  const t = Math.max(0, Math.min(1, (dbValue + 40) / 40));
  return [Math.round(255 * t), Math.round(200 * t + 30 * (1 - t)), Math.round(60 + 40 * (1 - t))];
}

function drawHeatmap() {
  try {
    const map = ofdm_heatmap(num("hm-range"), num("hm-vel"), num("hm-snr"), num("hm-os"), num("hm-seed"));
    const canvas = document.getElementById("hm");
    const ctx = canvas.getContext("2d");
    const rows = map.delay_bins, cols = map.doppler_bins, power = map.power_db;
    const image = ctx.createImageData(canvas.width, canvas.height);
    for (let y = 0; y < canvas.height; y++) {
      const d = Math.floor(((canvas.height - 1 - y) / canvas.height) * rows);
      for (let x = 0; x < canvas.width; x++) {
        const j = Math.floor((x / canvas.width) * cols);
        const [r, g, b] = shade(power[d * cols + j]);
        const k = 4 * (y * canvas.width + x);
        image.data.set([r, g, b, 255], k);
      }
    }
    ctx.putImageData(image, 0, 0);
    report("hm-info",
      `estimate: ${map.est_range.toFixed(2)} m, ${(map.est_velocity * 3.6).toFixed(1)} km/h ` +
      `(axes: range 0..${map.max_range.toFixed(1)} m up, velocity ±${(map.max_velocity * 3.6).toFixed(0)} km/h across)`);
  } catch (e) {
    report("hm-info", String(e), true);
  }
}

// Line plot of series[i] against x; log10 y-axis when logY.
function plot(canvasId, x, series, labels, logY) {
  const canvas = document.getElementById(canvasId);
  const ctx = canvas.getContext("2d");
  const pad = 48;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const tf = (v) => (logY ? Math.log10(v) : v);
  const ys = series.flat().map(tf);
  const [ymin, ymax] = [Math.min(...ys), Math.max(...ys)];
  const [xmin, xmax] = [x[0], x[x.length - 1]];
  const px = (v) => pad + ((v - xmin) / (xmax - xmin)) * (canvas.width - 2 * pad);
  const py = (v) => canvas.height - pad - ((tf(v) - ymin) / (ymax - ymin || 1)) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(`${xmin} dB`, pad, canvas.height - pad + 16);
  ctx.fillText(`${xmax} dB`, canvas.width - pad - 30, canvas.height - pad + 16);
  const fmt = (v) => (logY ? (10 ** v).toExponential(1) : v.toFixed(2));
  ctx.fillText(fmt(ymax), 4, pad);
  ctx.fillText(fmt(ymin), 4, canvas.height - pad);
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.setLineDash(i === 0 ? [] : [6, 4 * i]);
    ctx.beginPath();
    s.forEach((v, k) => (k === 0 ? ctx.moveTo(px(x[k]), py(v)) : ctx.lineTo(px(x[k]), py(v))));
    ctx.stroke();
    ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.fillText(labels[i], canvas.width - pad - 60, pad + 14 * (i + 1));
  });
  ctx.setLineDash([]);
}

function drawBounds() {
  try {
    const q = num("cr-q");
    const flat = crlb_curves(num("cr-n"), num("cr-m"), num("cr-a"), num("cr-b"), 21);
    const rows = [];
    for (let i = 0; i < flat.length; i += 7) rows.push(flat.slice(i, i + 7));
    const x = rows.map((r) => r[0]);
    const series = [0, 1, 2].map((w) => rows.map((r) => r[1 + 2 * w + q]));
    plot("cr", x, series, ["OFDM", "OTFS", "FMCW"], true);
    report("cr-info", q === 0 ? "root CRLB of range [m]" : "root CRLB of velocity [m/s]");
  } catch (e) {
    report("cr-info", String(e), true);
  }
}

function drawRates() {
  try {
    const flat = rate_curves(num("rt-n"), num("rt-m"), num("rt-range"), num("rt-vel"), num("rt-a"), num("rt-b"), 21);
    const rows = [];
    for (let i = 0; i < flat.length; i += 3) rows.push(flat.slice(i, i + 3));
    plot("rt", rows.map((r) => r[0]), [rows.map((r) => r[1]), rows.map((r) => r[2])], ["OFDM", "OTFS"], false);
    report("rt-info", "bits/s/Hz");
  } catch (e) {
    report("rt-info", String(e), true);
  }
}

await init();
document.getElementById("hm-go").onclick = drawHeatmap;
document.getElementById("cr-go").onclick = drawBounds;
document.getElementById("rt-go").onclick = drawRates;
drawHeatmap();
drawBounds();
drawRates();
