// Demo page logic: slider state -> wasm curve data -> canvas plots.
// Build the wasm package first: `wasm-pack build --target web --out-dir www/pkg`
// (run inside crates/lacksim-web), then serve this directory.

import init, {
  table1_presets, model_moments, density_curves, residual_curves,
  insertion_curves, simulate_call,
} from "./pkg/lacksim_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const pad = { l: 56, r: 12, t: 10, b: 26 };
  ctx.clearRect(0, 0, W, H);

  let xMax = 0, yMax = 0;
  for (const s of series) {
    for (const [x, y] of s.points) {
      if (Number.isFinite(x)) xMax = Math.max(xMax, x);
      if (Number.isFinite(y)) yMax = Math.max(yMax, y);
    }
  }
  if (opts.yMax) yMax = opts.yMax;
  if (xMax <= 0 || yMax <= 0) return;
  yMax *= 1.05;

  const sx = (x) => pad.l + (x / xMax) * (W - pad.l - pad.r);
  const sy = (y) => H - pad.b - (y / yMax) * (H - pad.t - pad.b);

  // axes and gridlines
  ctx.strokeStyle = "#e4e9ee";
  ctx.fillStyle = "#5b6b7b";
  ctx.font = "11px system-ui";
  ctx.lineWidth = 1;
  const ticks = 5;
  for (let i = 0; i <= ticks; i++) {
    const xv = (xMax * i) / ticks, yv = (yMax * i) / ticks;
    ctx.beginPath(); ctx.moveTo(sx(xv), sy(0)); ctx.lineTo(sx(xv), sy(yMax)); ctx.stroke();
    ctx.beginPath(); ctx.moveTo(sx(0), sy(yv)); ctx.lineTo(sx(xMax), sy(yv)); ctx.stroke();
    ctx.fillText(xv.toFixed(0), sx(xv) - 8, H - 8);
    ctx.fillText(yv.toPrecision(3), 4, sy(yv) + 4);
  }

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 2;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let started = false;
    for (const [x, y] of s.points) {
      if (!Number.isFinite(y) || y > yMax) { started = false; continue; }
      if (!started) { ctx.moveTo(sx(x), sy(y)); started = true; }
      else ctx.lineTo(sx(x), sy(y));
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function unflatten(buf, stride) {
  const cols = [];
  for (let c = 0; c < stride; c++) cols.push([]);
  for (let i = 0; i < buf.length; i += stride) {
    for (let c = 0; c < stride; c++) cols[c].push(buf[i + c]);
  }
  return cols;
}

const zip = (xs, ys) => xs.map((x, i) => [x, ys[i]]);

function modelArgs() {
  const kind = $("kind").value;
  return [kind, parseFloat($("shape").value), parseFloat($("scale").value)];
}

function refreshModel() {
  const [kind, k, lam] = modelArgs();
  $("shape-val").textContent = k.toFixed(2);
  $("scale-val").textContent = lam.toFixed(1);
  $("shape").disabled = kind !== "weibull";
  $("scale").disabled = kind === "empirical";

  const m = JSON.parse(model_moments(kind, k, lam));
  $("moments").innerHTML =
    `mean <b>${m.mean.toFixed(2)} s</b> &nbsp; std <b>${m.std_dev.toFixed(2)} s</b>` +
    ` &nbsp; C<sub>v</sub> <b>${m.cv.toFixed(3)}</b>`;

  const xMax = 300;
  const [xs, pdf, ccdf] = unflatten(density_curves(kind, k, lam, xMax, 241), 3);
  const pdfMax = Math.max(...pdf.filter(Number.isFinite));
  plot($("density"), [
    { points: zip(xs, pdf.map((v) => v / (pdfMax || 1))), color: "#0b7285" },
    { points: zip(xs, ccdf), color: "#e8590c" },
  ], { yMax: 1 });

  const [ts, exact, upper, approx] = unflatten(residual_curves(kind, k, lam, 300, 121), 4);
  plot($("residual"), [
    { points: zip(ts, upper), color: "#adb5bd", dash: [6, 4], width: 1.5 },
    { points: zip(ts, ts), color: "#adb5bd", dash: [6, 4], width: 1.5 },
    { points: zip(ts, approx), color: "#e8590c", width: 1.2 },
    { points: zip(ts, exact), color: "#0b7285" },
  ], { yMax: Math.max(...exact) * 1.6 });

  refreshInsertion();
}

let lastCall = null;

function refreshInsertion() {
  const [kind, k, lam] = modelArgs();
  const s = parseInt($("budget").value, 10) || 1000;
  const cf = parseFloat($("cf").value);
  $("cf-val").textContent = cf.toFixed(2);
  const codec = $("codec").value;
  const [ts, frozen, depleted] = unflatten(
    insertion_curves(kind, k, lam, BigInt(s), cf, codec, 300, 121), 3);
  const series = [
    { points: zip(ts, frozen), color: "#adb5bd", dash: [6, 4], width: 1.5 },
    { points: zip(ts, depleted), color: "#0b7285" },
  ];
  if (lastCall) {
    series.push({ points: zip(lastCall.trajectory_t, lastCall.trajectory_ir),
                  color: "#e8590c", width: 1.5 });
  }
  plot($("insertion"), series, { yMax: Math.max(...frozen) * 1.3 });
}

function runCall() {
  const [kind, k, lam] = modelArgs();
  const s = parseInt($("budget").value, 10) || 1000;
  const cf = parseFloat($("cf").value);
  const loss = parseFloat($("loss").value);
  const jitter = parseFloat($("jitter").value);
  $("loss-val").textContent = loss.toFixed(3);
  $("jitter-val").textContent = jitter.toFixed(3);
  const seed = BigInt(parseInt($("seed").value, 10) || 0);
  try {
    lastCall = JSON.parse(simulate_call(
      kind, k, lam, $("codec").value, BigInt(s), cf, loss, jitter, seed));
  } catch (e) {
    $("call-report").textContent = `simulation error: ${e}`;
    return;
  }
  const c = lastCall;
  const exhausted = c.budget_exhausted_at === null
    ? "budget not exhausted" : `budget exhausted at ${c.budget_exhausted_at.toFixed(1)} s`;
  $("call-report").innerHTML =
    `call lasted <b>${c.duration.toFixed(1)} s</b> (${c.packets} packets) — ` +
    `sent <b>${c.covert_bits_sent}</b> covert bits, delivered <b>${c.covert_bits_delivered}</b>; ` +
    `${exhausted}; unaware-receiver discard <b>${(100 * c.total_discard).toFixed(2)}%</b> ` +
    `(induced ${(100 * c.induced_loss).toFixed(2)}%, natural ${(100 * c.natural_loss).toFixed(2)}%); ` +
    `false covert reads: ${c.false_covert_reads}`;
  refreshInsertion();
}

async function main() {
  await init();
  $("status").textContent = "";

  const presets = JSON.parse(table1_presets());
  const holder = $("presets");
  for (const p of presets) {
    const b = document.createElement("button");
    b.textContent = `k=${p.k}, λ=${p.lambda} (Cv ${p.cv})`;
    b.onclick = () => {
      $("kind").value = "weibull";
      $("shape").value = p.k;
      $("scale").value = p.lambda;
      refreshModel();
    };
    holder.appendChild(b);
  }

  for (const id of ["kind", "shape", "scale"]) $(id).oninput = refreshModel;
  for (const id of ["budget", "cf", "codec"]) $(id).oninput = refreshInsertion;
  for (const id of ["loss", "jitter"]) $(id).oninput = () => {
    $("loss-val").textContent = parseFloat($("loss").value).toFixed(3);
    $("jitter-val").textContent = parseFloat($("jitter").value).toFixed(3);
  };
  $("run").onclick = runCall;

  refreshModel();
  runCall();
}

main().catch((e) => { $("status").textContent = `failed to load wasm: ${e}`; });
