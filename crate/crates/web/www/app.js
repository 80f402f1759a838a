import init, { demo_config, pareto_front, sensor_metrics, track } from "./pkg/uwsn_web.js";

const canvas = document.getElementById("plot");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");
const legend = document.getElementById("legend");
const config = document.getElementById("config");
const W = canvas.width, H = canvas.height, PAD = 40;

function clear() {
  ctx.clearRect(0, 0, W, H);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(PAD, PAD, W - 2 * PAD, H - 2 * PAD);
}

// maps data coordinates in [lo, hi]² to the plot area
function scaler(lo, hi) {
  const s = (W - 2 * PAD) / (hi - lo);
  return (x, y) => [PAD + (x - lo) * s, H - PAD - (y - lo) * s];
}

function dot(x, y, r, fill) {
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fillStyle = fill;
  ctx.fill();
}

function drawSensors(sensors, at, shade) {
  for (const s of sensors) {
    const [x, y] = at(s.x, s.y);
    dot(x, y, 7, shade(s));
    ctx.fillStyle = "#000";
    ctx.fillText(s.id, x + 8, y - 6);
  }
}

function field(sensors) {
  const ext = Math.max(...sensors.map(s => Math.max(Math.abs(s.x), Math.abs(s.y)))) + 5;
  return scaler(-ext, ext);
}

function showFront(data) {
  clear();
  const at = scaler(0, 1);
  ctx.fillStyle = "#000";
  ctx.fillText("f2 (fraction selected)", W / 2 - 50, H - 10);
  ctx.fillText("f1 (information gap)", 5, PAD - 10);
  data.points.forEach((p, i) => {
    const [x, y] = at(p.f2, p.f1);
    const colour = i === data.knee ? "#d62728" : i === data.compromise ? "#2ca02c" : "#1f77b4";
    dot(x, y, i === data.knee || i === data.compromise ? 6 : 3.5, colour);
  });
  legend.textContent = `${data.points.length} non-dominated selections. Red: knee point ` +
    `(${data.points[data.knee].count} sensors). Green: compromise (${data.points[data.compromise].count} sensors).`;
}

function showMetrics(data) {
  clear();
  const at = field(data.sensors);
  const max = Math.max(...data.metrics.map(m => m.mi_bits), 1e-12);
  const byId = new Map(data.metrics.map(m => [m.id, m]));
  drawSensors(data.sensors, at, s => `rgba(31,119,180,${0.1 + 0.9 * byId.get(s.id).mi_bits / max})`);
  const [tx, ty] = at(...data.truth);
  dot(tx, ty, 5, "#d62728");
  legend.textContent = "Shade: single-sensor mutual information (darker is more informative). Red: target.";
}

function showTrack(data) {
  clear();
  const at = field(data.sensors);
  const hits = new Map();
  for (const s of data.steps) for (const id of s.selected) hits.set(id, (hits.get(id) || 0) + 1);
  drawSensors(data.sensors, at, s => `hsl(${120 * s.p_s}, 60%, ${hits.has(s.id) ? 40 : 80}%)`);
  for (const [key, colour] of [["truth", "#000"], ["estimate", "#d62728"]]) {
    ctx.beginPath();
    data.steps.forEach((s, i) => {
      const [x, y] = at(...s[key]);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.strokeStyle = colour;
    ctx.stroke();
  }
  const mse = data.steps.reduce((a, s) => a + s.sq_error, 0) / data.steps.length;
  legend.textContent = `Black: true track, red: estimate (mean squared error ${mse.toFixed(2)} m²). ` +
    "Sensor hue: sensing probability (red low, green high); dark sensors were selected at least once.";
}

function run(action) {
  status.textContent = "";
  try {
    action();
  } catch (e) {
    status.textContent = String(e);
  }
}

await init();
config.value = demo_config();
const step = () => Number(document.getElementById("step").value);
document.getElementById("front").onclick = () => run(() => showFront(JSON.parse(pareto_front(config.value, step()))));
document.getElementById("metrics").onclick = () => run(() => showMetrics(JSON.parse(sensor_metrics(config.value, step()))));
document.getElementById("track").onclick = () =>
  run(() => showTrack(JSON.parse(track(config.value, BigInt(document.getElementById("seed").value)))));
