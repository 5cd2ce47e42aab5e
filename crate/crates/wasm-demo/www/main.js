import init, { sampleGraph, discoverSchema, noiseCurve, sweepGrid } from "./pkg/pgscout_wasm.js";

const $ = (id) => document.getElementById(id);
const seed = () => Number($("seed").value) >>> 0;
const graph = () => $("graph").value;

function showError(target, e) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = e.message ?? String(e);
  target.appendChild(p);
}

// Yields to the browser so the "running" note paints before blocking work.
function busy(target, work) {
  target.textContent = "running...";
  setTimeout(() => {
    try { work(); } catch (e) { showError(target, e); }
  }, 20);
}

function setGraph(text) {
  $("graph").value = text;
  const lines = text.split("\n").filter((l) => l.trim()).length;
  $("graph-info").textContent = `${lines} records`;
}

function discover() {
  const out = $("discover-out");
  busy(out, () => {
    const r = JSON.parse(discoverSchema(graph(), $("method").value, $("postprocess").checked, seed()));
    $("discover-info").textContent =
      `${r.nodes} nodes, ${r.edges} edges, ${r.schema.nodeTypes.length} node types, ` +
      `${r.schema.edgeTypes.length} edge types in ${(r.seconds * 1000).toFixed(1)} ms`;
    out.textContent = r.strict ?? r.loose;
  });
}

function lineChart(rows) {
  const w = 420, h = 220, pad = 36;
  const x = (v) => pad + (v / 0.4) * (w - 2 * pad);
  const y = (v) => h - pad - v * (h - 2 * pad);
  const path = (key) => rows.map((r, i) => `${i ? "L" : "M"}${x(r.noise)},${y(r[key])}`).join(" ");
  const ticks = rows.map((r) =>
    `<text x="${x(r.noise)}" y="${h - pad + 16}" text-anchor="middle">${r.noise * 100}%</text>`).join("");
  return `<svg width="${w}" height="${h}" font-size="11">
    <line x1="${pad}" y1="${y(0)}" x2="${w - pad}" y2="${y(0)}" stroke="#999"/>
    <line x1="${pad}" y1="${y(0)}" x2="${pad}" y2="${y(1)}" stroke="#999"/>
    <text x="${pad - 6}" y="${y(1) + 4}" text-anchor="end">1</text>
    <text x="${pad - 6}" y="${y(0) + 4}" text-anchor="end">0</text>
    ${ticks}
    <path d="${path("nodeF1")}" fill="none" stroke="#1f77b4" stroke-width="2"/>
    <path d="${path("edgeF1")}" fill="none" stroke="#d62728" stroke-width="2"/>
    <text x="${w - pad}" y="${pad - 14}" text-anchor="end" fill="#1f77b4">node F1</text>
    <text x="${w - pad}" y="${pad}" text-anchor="end" fill="#d62728">edge F1</text>
  </svg>`;
}

function noise() {
  const out = $("noise-out");
  busy(out, () => {
    const rows = JSON.parse(noiseCurve(graph(), $("method").value, Number($("avail").value), seed()));
    const table = rows.map((r) =>
      `<tr><td>${r.noise * 100}%</td><td>${r.nodeF1.toFixed(3)}</td><td>${r.edgeF1.toFixed(3)}</td></tr>`).join("");
    out.innerHTML = lineChart(rows) +
      `<table><tr><th>dropped</th><th>node F1</th><th>edge F1</th></tr>${table}</table>`;
  });
}

// White at F1 = 0 through to green at F1 = 1.
const heat = (v) => `hsl(120, 55%, ${100 - 45 * v}%)`;

function sweepHeatmap() {
  const out = $("sweep-out");
  busy(out, () => {
    const rows = JSON.parse(sweepGrid(graph(), $("alphas").value, $("tables").value, seed()));
    const grid = rows.filter((r) => r.alpha !== null);
    const adaptive = rows.find((r) => r.alpha === null);
    const alphas = [...new Set(grid.map((r) => r.alpha))];
    const tables = [...new Set(grid.map((r) => r.tables))];
    const cell = (a, t) => grid.find((r) => r.alpha === a && r.tables === t);
    let html = `<table class="heat"><tr><th>multiplier \\ tables</th>${tables.map((t) => `<th>${t}</th>`).join("")}</tr>`;
    for (const a of alphas) {
      html += `<tr><th>${a}</th>` + tables.map((t) => {
        const r = cell(a, t);
        return `<td style="background:${heat(r.nodeF1)}" title="edge F1 ${r.edgeF1.toFixed(3)}, ` +
          `${r.nodeTypes} node types">${r.nodeF1.toFixed(3)}</td>`;
      }).join("") + "</tr>";
    }
    html += "</table>";
    html += `<p>Cells show node F1 (hover for edge F1). Adaptive parameters: node F1 ` +
      `${adaptive.nodeF1.toFixed(3)}, edge F1 ${adaptive.edgeF1.toFixed(3)}.</p>`;
    out.innerHTML = html;
  });
}

await init();
$("load-social").onclick = () => setGraph(sampleGraph("social", 0, 0, 0));
$("load-desk").onclick = () => {
  try {
    setGraph(sampleGraph("desk", Number($("desk-nodes").value), Number($("desk-edges").value), seed()));
  } catch (e) { showError($("graph-info"), e); }
};
$("run-discover").onclick = discover;
$("run-noise").onclick = noise;
$("run-sweep").onclick = sweepHeatmap;
setGraph(sampleGraph("social", 0, 0, 0));
