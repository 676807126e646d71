import init, { loss_curve, llr_compare, node_playground } from "./pkg/twostage_wasm_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const PAD = 40;

const num = (id) => Number(document.getElementById(id).value);
const list = (id) => document.getElementById(id).value.split(",").map((s) => Number(s.trim()));

function frame(canvas, xr, yr) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const w = canvas.width - 2 * PAD;
  const h = canvas.height - 2 * PAD;
  const sx = (x) => PAD + ((x - xr[0]) / (xr[1] - xr[0] || 1)) * w;
  const sy = (y) => PAD + h - ((y - yr[0]) / (yr[1] - yr[0] || 1)) * h;
  ctx.strokeStyle = "#999";
  ctx.strokeRect(PAD, PAD, w, h);
  ctx.fillStyle = "#333";
  ctx.fillText(xr[0].toFixed(1), PAD, PAD + h + 14);
  ctx.fillText(xr[1].toFixed(1), PAD + w - 20, PAD + h + 14);
  ctx.fillText(yr[1].toFixed(2), 2, PAD + 4);
  ctx.fillText(yr[0].toFixed(2), 2, PAD + h);
  return { ctx, sx, sy };
}

function line(p, xs, ys, color, dashed) {
  const { ctx, sx, sy } = p;
  ctx.strokeStyle = color;
  ctx.setLineDash(dashed ? [5, 4] : []);
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
  ctx.stroke();
  ctx.setLineDash([]);
}

function guard(errId, f) {
  const el = document.getElementById(errId);
  el.textContent = "";
  try {
    f();
  } catch (e) {
    el.textContent = e.message || String(e);
  }
}

function plotLoss() {
  guard("lc-err", () => {
    const lo = num("lc-lo");
    const hi = num("lc-hi");
    const rows = loss_curve(num("lc-m"), num("lc-m1"), lo, hi, 0.5, document.getElementById("lc-ray").checked);
    const snr = [], bicm = [], two = [];
    for (let i = 0; i < rows.length; i += 3) {
      snr.push(rows[i]);
      bicm.push(rows[i + 1]);
      two.push(rows[i + 2]);
    }
    const top = Math.min(2, Math.max(...bicm, ...two));
    const p = frame(document.getElementById("lc-canvas"), [lo, hi], [0, top]);
    line(p, snr, bicm.map((v) => Math.min(v, top)), COLORS[0]);
    line(p, snr, two.map((v) => Math.min(v, top)), COLORS[1]);
  });
}

function plotLlr() {
  guard("ll-err", () => {
    const m1Card = 1 << num("ll-m1");
    const rows = llr_compare(num("ll-m"), num("ll-m1"), num("ll-snr"), 400);
    const width = 1 + 2 * m1Card;
    const ys = [];
    const exact = Array.from({ length: m1Card }, () => []);
    const vm = Array.from({ length: m1Card }, () => []);
    for (let i = 0; i < rows.length; i += width) {
      ys.push(rows[i]);
      for (let b = 0; b < m1Card; b++) {
        exact[b].push(rows[i + 1 + b]);
        vm[b].push(rows[i + 1 + m1Card + b]);
      }
    }
    const all = exact.flat().concat(vm.flat());
    const lo = Math.max(Math.min(...all), -60);
    const hi = Math.min(Math.max(...all), 60);
    const clip = (v) => Math.max(lo, Math.min(hi, v));
    const p = frame(document.getElementById("ll-canvas"), [ys[0], ys[ys.length - 1]], [lo, hi]);
    for (let b = 0; b < m1Card; b++) {
      const c = COLORS[b % COLORS.length];
      line(p, ys, exact[b].map(clip), c, false);
      line(p, ys, vm[b].map(clip), c, true);
    }
  });
}

function combine() {
  guard("nd-err", () => {
    const m = num("nd-m");
    const mu = Float64Array.from(list("nd-mu"));
    const kappa = Float64Array.from(list("nd-k"));
    const out = node_playground(mu, kappa, m);
    document.getElementById("nd-out").textContent =
      `check node: mean ${out[0].toFixed(3)}, concentration ${out[1].toFixed(3)}; ` +
      `variable node: mean ${out[2].toFixed(3)}, concentration ${out[3].toFixed(3)}`;
    const cn = Array.from(out.slice(4, 4 + m));
    const vn = Array.from(out.slice(4 + m, 4 + 2 * m));
    const canvas = document.getElementById("nd-canvas");
    const p = frame(canvas, [0, m], [0, Math.max(...cn, ...vn)]);
    const bw = (canvas.width - 2 * PAD) / m / 2.5;
    [cn, vn].forEach((pmf, j) => {
      p.ctx.fillStyle = COLORS[j];
      pmf.forEach((v, s) => {
        const x = p.sx(s + 0.5) + (j - 1) * bw;
        p.ctx.fillRect(x, p.sy(v), bw, p.sy(0) - p.sy(v));
      });
    });
  });
}

await init();
document.getElementById("lc-run").onclick = plotLoss;
document.getElementById("ll-run").onclick = plotLlr;
document.getElementById("nd-run").onclick = combine;
plotLoss();
plotLlr();
combine();
