import init, { Simulation, guidance_field } from "./pkg/drpa_demo.js";

const worldCanvas = document.getElementById("world");
const ctx = worldCanvas.getContext("2d");
const fieldCanvas = document.getElementById("field");
const fctx = fieldCanvas.getContext("2d");
const statusBox = document.getElementById("status");
const $ = (id) => document.getElementById(id);

let sim = null;
let layout = null;
let trail = [];
let lastFrame = null;
let running = false;

function toCanvas([x, y]) {
  const b = layout.world.bounds;
  const sx = worldCanvas.width / (b.max[0] - b.min[0]);
  const sy = worldCanvas.height / (b.max[1] - b.min[1]);
  return [(x - b.min[0]) * sx, worldCanvas.height - (y - b.min[1]) * sy];
}

function toWorld(px, py) {
  const b = layout.world.bounds;
  const x = b.min[0] + (px / worldCanvas.width) * (b.max[0] - b.min[0]);
  const y = b.min[1] + ((worldCanvas.height - py) / worldCanvas.height) * (b.max[1] - b.min[1]);
  return [x, y];
}

function dot(p, r, color) {
  const [cx, cy] = toCanvas(p);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(cx, cy, r, 0, 2 * Math.PI);
  ctx.fill();
}

function polyline(points, color, width) {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  points.forEach((p, i) => {
    const [cx, cy] = toCanvas(p);
    if (i === 0) ctx.moveTo(cx, cy);
    else ctx.lineTo(cx, cy);
  });
  ctx.stroke();
}

function draw() {
  ctx.clearRect(0, 0, worldCanvas.width, worldCanvas.height);
  ctx.fillStyle = "#555";
  for (const ring of layout.world.polygons) {
    ctx.beginPath();
    ring.forEach((p, i) => {
      const [cx, cy] = toCanvas(p);
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    });
    ctx.closePath();
    ctx.fill();
  }
  polyline(trail, "#1f77b4", 2);
  dot(layout.start, 5, "#2ca02c");
  dot(layout.target, 7, "#d62728");
  if (lastFrame) {
    polyline(lastFrame.predicted, "#ff7f0e", 1.5);
    if (lastFrame.p_min) dot(lastFrame.p_min, 5, "#9467bd");
    if (lastFrame.p_vt) dot(lastFrame.p_vt, 5, "#e377c2");
    const [x, y, th] = lastFrame.pose;
    dot([x, y], 6, "#1f77b4");
    polyline([[x, y], [x + 0.8 * Math.cos(th), y + 0.8 * Math.sin(th)]], "#000", 2);
  }
}

function report(extra = "") {
  const f = lastFrame;
  const lines = f
    ? [`t = ${f.t.toFixed(1)} s`, `mode: ${f.mode}`, `status: ${f.status}`]
    : ["ready"];
  statusBox.textContent = lines.join("\n") + (extra ? `\n${extra}` : "");
}

function start() {
  try {
    if (sim) sim.free();
    sim = new Simulation(
      $("layout").value,
      $("planner").value,
      Number($("horizon").value),
      Number($("rollouts").value),
      Number($("seed").value),
    );
  } catch (e) {
    sim = null;
    running = false;
    report(String(e));
    return;
  }
  layout = JSON.parse(sim.world_json());
  trail = [layout.start];
  lastFrame = null;
  running = true;
  draw();
  report();
  requestAnimationFrame(tick);
}

function tick() {
  if (!running || !sim) return;
  try {
    lastFrame = JSON.parse(sim.advance(Number($("speed").value)));
  } catch (e) {
    running = false;
    report(String(e));
    return;
  }
  trail.push(lastFrame.pose.slice(0, 2));
  if (lastFrame.p_min) drawField(lastFrame.p_min);
  draw();
  report();
  if (lastFrame.status === "running") requestAnimationFrame(tick);
  else running = false;
}

function drawField(pMin) {
  const wRep = Number($("wrep").value);
  const dVt = Number($("dvt").value);
  $("wrep-val").textContent = wRep;
  $("dvt-val").textContent = dVt;
  const target = layout ? layout.target : [pMin[0] + 10, pMin[1]];
  const n = 80;
  let values;
  try {
    values = guidance_field(pMin[0], pMin[1], target[0], target[1], dVt, wRep, 2 * dVt, n);
  } catch (e) {
    report(String(e));
    return;
  }
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const cell = fieldCanvas.width / n;
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const s = (values[j * n + i] - lo) / (hi - lo || 1);
      const c = Math.round(255 * s);
      fctx.fillStyle = `rgb(${c}, ${Math.round(80 + 120 * s)}, ${255 - c})`;
      fctx.fillRect(i * cell, (n - 1 - j) * cell, cell + 1, cell + 1);
    }
  }
}

worldCanvas.addEventListener("click", (ev) => {
  if (!sim || !layout) return;
  const rect = worldCanvas.getBoundingClientRect();
  const p = toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  try {
    sim.set_target(p[0], p[1]);
  } catch (e) {
    report(String(e));
    return;
  }
  layout.target = p;
  draw();
  if (!running) {
    running = true;
    requestAnimationFrame(tick);
  }
});

$("start").addEventListener("click", start);
$("pause").addEventListener("click", () => {
  running = !running;
  $("pause").textContent = running ? "Pause" : "Resume";
  if (running) requestAnimationFrame(tick);
});
for (const id of ["wrep", "dvt"]) {
  $(id).addEventListener("input", () => drawField(lastFrame && lastFrame.p_min ? lastFrame.p_min : [0, 0]));
}

await init();
drawField([0, 0]);
report();
