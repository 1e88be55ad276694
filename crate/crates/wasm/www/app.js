import init, { cluster, generate, sparse_degrees, shape_names } from "./pkg/gfdc_wasm.js";

const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

const $ = (id) => document.getElementById(id);
const canvas = $("plot");
const ctx = canvas.getContext("2d");
const MARGIN = 20;

// points live in data coordinates; the view maps them onto the canvas
let points = [];
let colors = [];
let marks = [];
let view = { x0: 0, y0: 0, scale: 1 };

function fitView() {
  if (points.length === 0) {
    view = { x0: 0, y0: 0, scale: (canvas.width - 2 * MARGIN) / 40 };
    return;
  }
  const xs = points.map((p) => p[0]), ys = points.map((p) => p[1]);
  const x0 = Math.min(...xs), y0 = Math.min(...ys);
  const span = Math.max(Math.max(...xs) - x0, Math.max(...ys) - y0, 1e-9);
  view = { x0, y0, scale: (canvas.width - 2 * MARGIN) / span };
}

const toCanvas = ([x, y]) => [
  MARGIN + (x - view.x0) * view.scale,
  canvas.height - MARGIN - (y - view.y0) * view.scale,
];
const toData = (cx, cy) => [
  view.x0 + (cx - MARGIN) / view.scale,
  view.y0 + (canvas.height - MARGIN - cy) / view.scale,
];

function draw() {
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  points.forEach((p, i) => {
    const [x, y] = toCanvas(p);
    if (marks[i]) {
      ctx.strokeStyle = "#000";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(x - 4, y - 4); ctx.lineTo(x + 4, y + 4);
      ctx.moveTo(x + 4, y - 4); ctx.lineTo(x - 4, y + 4);
      ctx.stroke();
      return;
    }
    ctx.fillStyle = colors[i] || "#555";
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function reset(newPoints) {
  points = newPoints;
  colors = [];
  marks = [];
  fitView();
  draw();
}

const flat = () => Float64Array.from(points.flat());
const optNumber = (id, fallback) => {
  const v = $(id).value.trim();
  return v === "" ? fallback : Number(v);
};

function status(text) {
  $("status").textContent = text;
}

function guard(fn) {
  return () => {
    try {
      fn();
    } catch (e) {
      status("error: " + (e.message || e));
    }
  };
}

function loadShape() {
  const g = JSON.parse(generate($("shape").value, optNumber("seed", 1)));
  const pts = [];
  for (let i = 0; i < g.points.length; i += 2) pts.push([g.points[i], g.points[i + 1]]);
  reset(pts);
  colors = g.labels.map((l) => PALETTE[(l - 1) % PALETTE.length]);
  $("clusters").value = g.clusters;
  draw();
  status(`${g.name}: ${pts.length} points, ${g.clusters} classes (true labels shown)`);
}

function runCluster() {
  const t0 = performance.now();
  const doc = JSON.parse(cluster(flat(), 2, optNumber("clusters", 2), optNumber("tau", -1), optNumber("k", 0)));
  const ms = performance.now() - t0;
  colors = doc.labels.map((l) => (l > 0 ? PALETTE[(l - 1) % PALETTE.length] : "#000"));
  marks = doc.labels.map((l) => l < 0);
  draw();
  const s = doc.stages;
  status(`n=${doc.n} k=${doc.k} path=${s.path} granules=${s.granules} ` +
    `granule clusters=${s.granule_clusters} flocks=${s.final_flocks} ` +
    `stable=${s.stable} unstable=${s.unstable} outliers=${doc.outliers.length} (${ms.toFixed(1)} ms)`);
}

function shadeSparseDegree() {
  const t = JSON.parse(sparse_degrees(flat(), 2, optNumber("k", 0)));
  const lo = Math.min(...t.sd), hi = Math.max(...t.sd);
  // dense samples dark, sparse ones light
  colors = t.sd.map((v) => {
    const u = hi > lo ? (v - lo) / (hi - lo) : 0;
    const c = Math.round(30 + 200 * u);
    return `rgb(${c},${c},${255 - c / 2})`;
  });
  marks = [];
  draw();
  status(`sparse degree with k=${t.k}: min ${lo.toFixed(3)}, max ${hi.toFixed(3)}`);
}

canvas.addEventListener("click", (ev) => {
  const r = canvas.getBoundingClientRect();
  points.push(toData(ev.clientX - r.left, ev.clientY - r.top));
  colors.push("#555");
  marks.push(false);
  draw();
  status(`${points.length} points`);
});

await init();
for (const name of shape_names().split(",")) {
  $("shape").add(new Option(name, name));
}
$("load").onclick = guard(loadShape);
$("clear").onclick = () => { reset([]); status("cleared"); };
$("run").onclick = guard(runCluster);
$("sd").onclick = guard(shadeSparseDegree);
reset([]);
