import init, { Demo, pair_loss_curve } from "./pkg/jetr_demo.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function plot(canvas, series, { xmin, xmax }) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 36;
  ctx.clearRect(0, 0, w, h);
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  if (ys.length === 0) return;
  let ymin = Math.min(...ys), ymax = Math.max(...ys);
  if (ymin === ymax) { ymin -= 1; ymax += 1; }
  const sx = (x) => pad + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - ymin) / (ymax - ymin)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.fillText(ymax.toFixed(3), 2, pad + 4);
  ctx.fillText(ymin.toFixed(3), 2, h - pad);
  ctx.fillText(String(xmin), pad, h - pad + 14);
  ctx.fillText(String(xmax), w - pad - 20, h - pad + 14);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
  }
}

function fmt(x) {
  return typeof x === "number" ? x.toFixed(4) : "";
}

function renderMetrics() {
  const m = JSON.parse(demo.metrics(10));
  const losses = m.losses.map((y, i) => [i + 1, y]);
  plot($("losses"), [{ points: losses, color: "#1f5fbf" }], { xmin: 1, xmax: Math.max(2, losses.length) });
  const keys = ["mrr", "map", "ndcg_at_10", "recall_at_10", "hit_rate_at_10"];
  $("metrics").innerHTML =
    `<tr><th>epoch ${m.epoch}</th>${keys.map((k) => `<th>${k}</th>`).join("")}</tr>` +
    `<tr><td>raw</td>${keys.map((k) => `<td>${fmt(m.raw[k])}</td>`).join("")}</tr>` +
    `<tr><td>enhanced</td>${keys.map((k) => `<td>${fmt(m.enhanced[k])}</td>`).join("")}</tr>`;
}

function reset() {
  demo = new Demo(Number($("seed").value) >>> 0, Number($("noise").value), Number($("gain").value));
  $("query").innerHTML = JSON.parse(demo.query_ids()).map((q) => `<option>${q}</option>`).join("");
  renderMetrics();
  $("ranking").innerHTML = "";
  $("rankinfo").textContent = "";
}

function train() {
  const t0 = performance.now();
  demo.train(Math.max(1, Number($("epochs").value) | 0));
  renderMetrics();
  $("status").textContent = `trained in ${(performance.now() - t0).toFixed(0)} ms`;
}

function rank() {
  const r = JSON.parse(demo.rank($("query").value, Math.max(1, Number($("k").value) | 0)));
  $("rankinfo").textContent = `${r.query_id} (lesson ${r.lesson_id}, ${r.qtype}): context ${r.context}`;
  $("ranking").innerHTML =
    "<tr><th>rank</th><th>doc</th><th>enhanced</th><th>raw cosine</th><th>raw rank</th></tr>" +
    r.rows
      .map((row, i) =>
        `<tr class="${row.relevant ? "rel" : ""}"><td>${i + 1}</td><td>${row.doc_id}</td>` +
        `<td>${fmt(row.enhanced_score)}</td><td>${fmt(row.raw_cosine)}</td><td>${row.raw_rank}</td></tr>`)
      .join("");
}

function curve() {
  const eps = Math.pow(10, Number($("eps").value));
  $("epsval").textContent = eps.toExponential(2);
  plot($("curve"), [
    { points: JSON.parse(pair_loss_curve(-1, eps, 401)), color: "#1f5fbf" },
    { points: JSON.parse(pair_loss_curve(1, eps, 401)), color: "#c0392b" },
  ], { xmin: -1, xmax: 1 });
}

function guard(f) {
  return () => {
    try { f(); } catch (e) { $("status").textContent = `error: ${e}`; }
  };
}

await init();
$("status").textContent = "ready";
$("reset").onclick = guard(reset);
$("train").onclick = guard(train);
$("rank").onclick = guard(rank);
$("eps").oninput = guard(curve);
guard(reset)();
curve();
