import init, { catalog_json, regime_json, matrix_json } from "./pkg/fitconv_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"];

function plotCurves(canvas, curves) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const pts = curves.flatMap((c) => c.points);
  if (pts.length === 0) return;
  const pad = 40;
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs) || 1];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  ctx.fillText(String(x0), pad, h - pad + 14);
  ctx.fillText(String(x1), w - pad - 20, h - pad + 14);

  curves.forEach((c, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.setLineDash(c.dashed ? [5, 4] : []);
    ctx.lineWidth = c.dashed ? 2 : 1.5;
    ctx.beginPath();
    c.points.forEach(([x, y], k) => (k ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(c.label, w - pad - 110, pad + 14 + 13 * i);
  });
  ctx.setLineDash([]);
}

function plotMatrix(canvas, view) {
  const ctx = canvas.getContext("2d");
  const rows = view.cells.length;
  const cols = view.cells[0].length;
  const cell = Math.min(canvas.width / cols, canvas.height / rows);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const external = new Set(view.belly.external_cells.map(([r, c]) => `${r},${c}`));
  const diagonal = new Set(view.belly.diagonal_cells.map(([r, c]) => `${r},${c}`));
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const key = `${r},${c}`;
      ctx.fillStyle = view.cells[r][c] === "1" ? "#222" : external.has(key) ? "#f3d9a4" : "#fff";
      ctx.fillRect(c * cell, r * cell, cell, cell);
      if (diagonal.has(key) && external.has(key)) {
        ctx.fillStyle = "rgba(214,39,40,0.6)";
        ctx.fillRect(c * cell, r * cell, cell, cell);
      }
    }
  }
  ctx.strokeStyle = "#d62728";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(0, 0);
  ctx.lineTo(cols * cell, rows * cell);
  ctx.stroke();
}

function runRegime() {
  const record = ["r1", "r2", "c1", "c2"].map((k) => `${k.toUpperCase()}=${$(k).value}`).join(",") + ",d=1";
  try {
    const v = JSON.parse(regime_json(record, Number($("gamma").value), Number($("regime-iters").value)));
    const curves = [...v.simulated];
    if (v.closed_form) curves.push({ ...v.closed_form, dashed: true });
    plotCurves($("regime-plot"), curves);
    $("regime-out").className = "";
    $("regime-out").textContent = JSON.stringify(v.regime, null, 2);
  } catch (e) {
    $("regime-out").className = "err";
    $("regime-out").textContent = String(e);
  }
}

function runMatrix() {
  const source = $("pattern").value.trim() || $("named").value;
  try {
    const v = JSON.parse(matrix_json(source, Number($("matrix-iters").value)));
    plotMatrix($("matrix-plot"), v);
    plotCurves($("traj-plot"), v.trajectories);
    const labels = v.row_labels.map((l, i) => `${l}: ${label(v.decay[i])}`).join("\n");
    $("matrix-out").className = "";
    $("matrix-out").textContent =
      `crossing: ${v.belly.crossing}${v.belly.grazing ? " (corner contact only)" : ""}\n` +
      `crossing country: ${v.crossing_country ?? "none"}\n\n${labels}`;
  } catch (e) {
    $("matrix-out").className = "err";
    $("matrix-out").textContent = String(e);
  }
}

function label(d) {
  switch (d.class) {
    case "converged": return `converges to ${d.limit.toPrecision(4)}`;
    case "power_law": return `n^${d.alpha.toFixed(2)}`;
    case "exponential": return `exp(${d.rate.toFixed(3)} n)`;
    default: return d.class;
  }
}

await init();
for (const e of JSON.parse(catalog_json())) {
  const opt = document.createElement("option");
  opt.value = e.name;
  opt.textContent = `${e.name} (${e.rows}x${e.cols})`;
  opt.title = e.about;
  $("named").append(opt);
}
$("named").value = "B";
for (const id of ["r1", "r2", "c1", "c2", "gamma", "regime-iters"]) $(id).addEventListener("input", runRegime);
$("analyse").addEventListener("click", runMatrix);
$("named").addEventListener("change", () => { $("pattern").value = ""; runMatrix(); });
runRegime();
runMatrix();
