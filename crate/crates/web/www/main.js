import init, { design, sweep, doublewell } from "./pkg/sta_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// Line plot of several series sharing one x axis.
function plot(canvas, x, series, { xlabel = "", ylabel = "", logY = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, m = { l: 58, r: 10, t: 10, b: 34 };
  ctx.clearRect(0, 0, w, h);
  const tf = (v) => (logY ? Math.log10(v) : v);
  const ys = series.flatMap((s) => s.y.filter((v) => Number.isFinite(v) && (!logY || v > 0)).map(tf));
  if (!ys.length) return;
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const [x0, x1] = [x[0], x[x.length - 1]];
  const px = (v) => m.l + ((v - x0) / (x1 - x0)) * (w - m.l - m.r);
  const py = (v) => h - m.b - ((tf(v) - y0) / (y1 - y0)) * (h - m.t - m.b);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(m.l, m.t, w - m.l - m.r, h - m.t - m.b);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  const fmt = (v) => (Math.abs(v) >= 1e4 || (Math.abs(v) < 1e-2 && v !== 0) ? v.toExponential(1) : v.toPrecision(3));
  ctx.fillText(fmt(logY ? 10 ** y1 : y1), 2, m.t + 10);
  ctx.fillText(fmt(logY ? 10 ** y0 : y0), 2, h - m.b);
  ctx.fillText(fmt(x0), m.l, h - m.b + 14);
  ctx.fillText(fmt(x1), w - m.r - 30, h - m.b + 14);
  ctx.fillText(xlabel, w / 2 - 20, h - 6);
  ctx.save();
  ctx.translate(12, h / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();

  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let pen = false;
    s.y.forEach((v, i) => {
      if (!Number.isFinite(v) || (logY && v <= 0)) { pen = false; return; }
      pen ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v));
      pen = true;
    });
    ctx.stroke();
    if (s.label) {
      ctx.fillStyle = s.color;
      ctx.fillText(s.label, w - m.r - 90, m.t + 14 + 13 * k);
    }
  });
}

function guard(out, f) {
  try {
    out.classList.remove("err");
    f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function runDesign() {
  guard($("d-out"), () => {
    const v = JSON.parse(design(num("d-f"), num("d-gamma"), num("d-d"), num("d-vf"), num("d-eps"), num("d-tf")));
    plot($("d-freq"), v.t_us, [{ y: v.f_mhz_signed, color: "#1f5fbf", label: "f (MHz)" }], {
      xlabel: "t (us)", ylabel: "signed f (MHz)",
    });
    plot($("d-pos"), v.t_us, [
      { y: v.x0_um, color: "#c0392b", label: "trap center" },
      { y: v.alpha_um, color: "#27ae60", label: "alpha" },
    ], { xlabel: "t (us)", ylabel: "position (um)" });
    const r = v.report;
    $("d-out").textContent =
      `feasible: ${v.feasible}  real frequency: ${r.real_frequency_ok}  box: ${r.box_ok}\n` +
      `exceeded distance: ${((r.exceeded_distance ?? 0) * 1e6).toFixed(3)} um\n` +
      `shortest feasible t_f: ${v.t_min_us === null ? "none found" : v.t_min_us.toFixed(4) + " us"}`;
  });
}

function runSweep() {
  guard($("s-out"), () => {
    const v = JSON.parse(sweep(num("s-f"), num("s-gamma"), num("s-d")));
    plot($("s-plot"), v.t_f_us, [
      { y: v.sequential, color: "#c0392b", label: "sequential" },
      { y: v.dual, color: "#1f5fbf", label: "dual" },
    ], { xlabel: "t_f (us)", ylabel: "x_e / d", logY: true });
    const inside = (ys) => ys.filter((y) => y === 0).length;
    $("s-out").textContent =
      `points inside the box: dual ${inside(v.dual)}/${v.dual.length}, sequential ${inside(v.sequential)}/${v.sequential.length}`;
  });
}

let wells = null;

function drawSnapshot() {
  if (!wells) return;
  const s = wells.snapshots[Math.min(+$("w-snap").value, wells.snapshots.length - 1)];
  plot($("w-pot"), s.scaled_x, [{ y: s.potential, color: "#8e44ad", label: `t = ${s.t_us.toFixed(3)} us` }], {
    xlabel: "(x - alpha) / rho (m)", ylabel: "U / max|U|",
  });
}

function runWells() {
  guard($("w-out"), () => {
    wells = JSON.parse(doublewell($("w-preset").value, num("w-eps"), num("w-v0"), num("w-tf"), 9));
    $("w-snap").max = wells.snapshots.length - 1;
    plot($("w-alpha"), wells.t_us, [{ y: wells.alpha_over_d, color: "#27ae60", label: "alpha / d" }], {
      xlabel: "t (us)", ylabel: "alpha / d",
    });
    drawSnapshot();
    const l = wells.launch;
    $("w-out").textContent =
      `<v+> = ${l.v_plus.toFixed(6)} m/s   <v-> = ${l.v_minus.toFixed(6)} m/s   dv = ${l.delta_v.toExponential(3)} m/s\n` +
      `separated: ${l.separated}` + (l.warnings.length ? `\n${l.warnings.join("\n")}` : "");
  });
}

await init();
$("d-run").onclick = runDesign;
$("s-run").onclick = runSweep;
$("w-run").onclick = runWells;
$("w-snap").oninput = drawSnapshot;
runDesign();
runSweep();
runWells();
