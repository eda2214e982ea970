import init, { g2_curve, contrast_curve, optimum } from "./pkg/magnon_blockade_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const COLORS = ["#1f4e9c", "#c0392b"];

function draw(xs, curves, labels, logY) {
  const c = $("plot");
  const ctx = c.getContext("2d");
  const [L, R, T, B] = [70, 20, 20, 40];
  const w = c.width - L - R, h = c.height - T - B;
  ctx.clearRect(0, 0, c.width, c.height);
  const tr = (v) => (logY ? (v > 0 ? Math.log10(v) : NaN) : v);
  let ys = curves.flat().map(tr).filter(Number.isFinite);
  if (ys.length === 0) return;
  let y0 = Math.min(...ys), y1 = Math.max(...ys);
  if (logY) y0 = Math.max(y0, y1 - 12);
  if (y0 === y1) { y0 -= 0.5; y1 += 0.5; }
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => L + ((x - x0) / (x1 - x0)) * w;
  const py = (y) => T + h - ((Math.max(tr(y), y0) - y0) / (y1 - y0)) * h;

  ctx.strokeStyle = "#000";
  ctx.strokeRect(L, T, w, h);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 12, T + h + 16);
    const t = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(logY ? "1e" + t.toFixed(1) : t.toPrecision(3), 4, T + h - (h * i) / 4 + 4);
  }
  if (logY && y0 < 0 && y1 > 0) {
    // g2 = 1
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(L, T + h - ((0 - y0) / (y1 - y0)) * h);
    ctx.lineTo(L + w, T + h - ((0 - y0) / (y1 - y0)) * h);
    ctx.stroke();
    ctx.setLineDash([]);
  }
  curves.forEach((ys, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    let up = true;
    ys.forEach((y, i) => {
      if (!Number.isFinite(tr(y))) { up = true; return; }
      if (up) ctx.moveTo(px(xs[i]), py(y)); else ctx.lineTo(px(xs[i]), py(y));
      up = false;
    });
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(labels[k], L + w - 140, T + 16 + 16 * k);
  });
}

function update() {
  $("status").textContent = "";
  const [axis, lo, hi, n] = [$("axis").value, num("lo"), num("hi"), Math.round(num("n"))];
  const two = $("two").checked;
  const args = [axis, lo, hi, n, num("delta"), num("g"), num("k"), num("omega"), two];
  const xs = Array.from({ length: n }, (_, i) => lo + ((hi - lo) * i) / (n - 1));
  try {
    if ($("obs").value === "g2") {
      const v = g2_curve(...args);
      const labels = two ? ["K+-", "K-+"] : ["K>0", "K<0"];
      draw(xs, [Array.from(v.slice(0, n)), Array.from(v.slice(n))], labels, true);
    } else {
      draw(xs, [Array.from(contrast_curve(...args))], ["contrast"], false);
    }
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

function useOptimum() {
  try {
    const [d, g, g2] = optimum(num("k"), num("omega"));
    $("delta").value = d.toFixed(6);
    $("g").value = g.toFixed(6);
    $("two").checked = false;
    $("optout").textContent = `delta = ${d.toFixed(4)}, g = ${g.toFixed(4)}, g2 = ${g2.toExponential(2)}`;
    update();
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

await init();
for (const el of document.querySelectorAll("input, select")) el.addEventListener("input", update);
$("opt").addEventListener("click", useOptimum);
update();
