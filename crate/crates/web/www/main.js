import init, { generate_graded, find_route, run_compare } from "./pkg/grade_route_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let view = null;
let paths = {};

function scenario() {
  return [num("regions"), num("pnr"), num("seed")];
}

function call(f) {
  $("status").textContent = "";
  try {
    return JSON.parse(f());
  } catch (e) {
    $("status").textContent = String(e);
    return null;
  }
}

function drawGraph() {
  const c = $("graph");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  if (!view) return;
  const px = (n) => [n.x * c.width, n.y * c.height];

  g.lineWidth = 1;
  for (const l of view.links) {
    const [x1, y1] = px(view.nodes[l.u]);
    const [x2, y2] = px(view.nodes[l.v]);
    g.strokeStyle = l.kept ? "#9c9" : "#e3e3e3";
    g.beginPath();
    g.moveTo(x1, y1);
    g.lineTo(x2, y2);
    g.stroke();
  }

  const colors = { graded: "#36c", ungraded: "#e90" };
  for (const [mode, p] of Object.entries(paths)) {
    if (!colors[mode] || !p.valid) continue;
    g.strokeStyle = colors[mode];
    g.lineWidth = mode === "graded" ? 5 : 2.5;
    g.beginPath();
    p.path.forEach((id, i) => {
      const [x, y] = px(view.nodes[id]);
      if (i === 0) g.moveTo(x, y);
      else g.lineTo(x, y);
    });
    g.stroke();
  }

  g.font = "10px system-ui";
  g.textAlign = "center";
  g.textBaseline = "middle";
  for (const n of view.nodes) {
    const [x, y] = px(n);
    g.fillStyle = !n.alive ? "#c33" : n.kept ? "#2a7" : "#bbb";
    g.beginPath();
    g.arc(x, y, 10, 0, 2 * Math.PI);
    g.fill();
    g.fillStyle = "#fff";
    g.fillText(n.id, x, y);
  }
}

function drawTrace() {
  const c = $("trace");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 30;
  g.strokeStyle = "#999";
  g.strokeRect(pad, 5, c.width - pad - 5, c.height - pad - 5);
  g.fillStyle = "#555";
  g.font = "10px system-ui";
  g.fillText("1", 10, 12);
  g.fillText("0", 10, c.height - pad);
  g.fillText("iteration", c.width / 2 - 20, c.height - 8);
  const colors = { graded: "#36c", ungraded: "#e90" };
  for (const [mode, p] of Object.entries(paths)) {
    if (!p.trace.length) continue;
    const w = (c.width - pad - 5) / Math.max(1, p.trace.length - 1);
    const h = c.height - pad - 5;
    g.strokeStyle = colors[mode];
    g.lineWidth = 2;
    g.beginPath();
    p.trace.forEach((f, i) => {
      const x = pad + i * w;
      const y = 5 + h * (1 - f);
      if (i === 0) g.moveTo(x, y);
      else g.lineTo(x, y);
    });
    g.stroke();
  }
}

function grade() {
  const v = call(() => generate_graded(...scenario(), num("source"), num("dest")));
  if (!v) return;
  view = v;
  paths = {};
  $("summary").textContent =
    `${v.kept} of ${v.nodes.length} nodes kept` +
    (v.widened ? ", grade band widened to reconnect" : "") +
    (v.connected ? "" : ", source and dest disconnected");
  drawGraph();
  drawTrace();
}

function route() {
  if (!view) grade();
  if (!view) return;
  paths = {};
  const lines = [];
  for (const mode of ["ungraded", "graded", "oracle"]) {
    const r = call(() => find_route(...scenario(), num("source"), num("dest"), mode, num("noise")));
    if (!r) return;
    paths[mode] = r;
    const iters = r.iterations_to_converge === null ? "" : `, settled at iteration ${r.iterations_to_converge}`;
    lines.push(`${mode}: ${r.valid ? r.path.join("-") : "no path"} (fitness ${r.fitness.toFixed(4)}${iters}, ${r.nodes_considered}/${r.nodes_total} nodes)`);
  }
  $("routes").innerHTML = lines.join("<br>");
  drawGraph();
  drawTrace();
}

function compare() {
  const r = call(() => run_compare(...scenario(), num("trials")));
  if (!r) return;
  const head = ["trial", "ungraded it", "ungraded fit", "graded it", "graded fit", "nodes"];
  const rows = r.rows.map((x) =>
    x.error
      ? `<tr><td>${x.trial}</td><td colspan="5">${x.error}</td></tr>`
      : `<tr><td>${x.trial}</td><td>${x.ungraded_iterations}</td><td>${x.ungraded_fitness.toFixed(4)}</td>` +
        `<td>${x.graded_iterations}</td><td>${x.graded_fitness.toFixed(4)}</td><td>${x.nodes_graded}/${x.nodes_total}</td></tr>`
  );
  $("table").innerHTML =
    `<p>median iteration reduction ${r.median_iteration_reduction}, ` +
    `graded no slower in ${(100 * r.fraction_graded_not_slower).toFixed(0)}% of trials, ` +
    `mean node ratio ${r.mean_node_ratio === null ? "n/a" : r.mean_node_ratio.toFixed(3)}</p>` +
    `<table><tr>${head.map((h) => `<th>${h}</th>`).join("")}</tr>${rows.join("")}</table>`;
}

await init();
$("grade").onclick = grade;
$("route").onclick = route;
$("compare").onclick = compare;
grade();
