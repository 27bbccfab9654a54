import init, { Simulation, bundledConfig, compare, policies } from "./pkg/pitsim_wasm.js";

const $ = (id) => document.getElementById(id);

let sim = null;
let timer = null;

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "error" : "";
}

function inputs() {
  const seed = BigInt(Math.max(0, Math.trunc(Number($("seed").value) || 0)));
  const duration = Number($("duration").value);
  const config = $("config").value.trim() || undefined;
  return { seed, duration, config };
}

// Lets the status line repaint before a long synchronous call.
function later(fn) {
  return new Promise((resolve) => setTimeout(() => resolve(fn()), 20));
}

const fmt = (v, digits = 2) => (v === null || v === undefined ? "n/a" : v.toFixed(digits));

function kpiTable(k) {
  return `<tr><th>Produced tons</th><td>${fmt(k.produced_tons)}</td></tr>
<tr><th>Matching factor</th><td>${fmt(k.match_factor, 4)}</td></tr>
<tr><th>Total wait time (min)</th><td>${fmt(k.total_wait_time)}</td></tr>
<tr><th>Road jams</th><td>${k.road_jams}</td></tr>
<tr><th>ADL (s)</th><td>${fmt(k.adl, 6)}</td></tr>`;
}

function showTick(i) {
  if (!sim) return;
  $("tick").value = i;
  $("tick-label").textContent = `tick ${i} / ${sim.tickCount() - 1}, t = ${sim.tickTime(i).toFixed(1)} min`;
  $("frame").innerHTML = sim.renderFrame(i);
  $("events").textContent = sim.tickLog(i) || "(no events since previous tick)";
}

function stop() {
  clearInterval(timer);
  timer = null;
  $("play").textContent = "Play";
}

function togglePlay() {
  if (timer) return stop();
  if (Number($("tick").value) >= sim.tickCount() - 1) showTick(0);
  $("play").textContent = "Pause";
  timer = setInterval(() => {
    const next = Number($("tick").value) + 1;
    if (next >= sim.tickCount()) return stop();
    showTick(next);
  }, 120);
}

async function run() {
  stop();
  const { seed, duration, config } = inputs();
  const policy = $("policy").value;
  status(`running ${policy}...`);
  try {
    const started = performance.now();
    const next = await later(() => new Simulation(config, policy, seed, duration, $("random-events").checked));
    if (sim) sim.free();
    sim = next;
    const summary = JSON.parse(sim.summaryJson());
    $("kpis").innerHTML = kpiTable(summary.kpis);
    $("tick").max = sim.tickCount() - 1;
    $("run-production").innerHTML = sim.productionSvg();
    $("run-waiting").innerHTML = sim.waitingSvg();
    $("run-view").hidden = false;
    showTick(0);
    status(`${policy}, seed ${seed}: ${summary.ticks} ticks in ${(performance.now() - started).toFixed(0)} ms`);
  } catch (e) {
    status(e.message ?? String(e), true);
  }
}

async function compareAll() {
  const { seed, duration, config } = inputs();
  status("running every policy...");
  try {
    const c = JSON.parse(await later(() => compare(config, undefined, seed, duration)));
    const rows = c.rows
      .map(
        (r) => `<tr><td>${r.name}</td><td>${fmt(r.produced_tons)}</td><td>${fmt(r.match_factor, 4)}</td>` +
          `<td>${fmt(r.total_wait_time)}</td><td>${r.road_jams}</td><td>${fmt(r.adl, 6)}</td></tr>`,
      )
      .join("");
    $("compare-table").innerHTML =
      "<tr><th>Name</th><th>Produced Tons</th><th>Matching Factor</th><th>Total Wait Time</th><th>Road Jams</th><th>ADL</th></tr>" +
      rows;
    $("compare-production").innerHTML = c.production_svg;
    $("compare-waiting").innerHTML = c.waiting_svg;
    $("compare-view").hidden = false;
    status(`compared ${c.rows.length} policies on seed ${seed}`);
  } catch (e) {
    status(e.message ?? String(e), true);
  }
}

async function main() {
  await init();
  for (const name of policies()) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = name;
    if (name === "SQDispatcher") opt.selected = true;
    $("policy").append(opt);
  }
  $("run").addEventListener("click", run);
  $("compare").addEventListener("click", compareAll);
  $("play").addEventListener("click", togglePlay);
  $("tick").addEventListener("input", (e) => {
    stop();
    showTick(Number(e.target.value));
  });
  $("load-bundled").addEventListener("click", () => {
    $("config").value = bundledConfig();
  });
  status("ready");
}

main().catch((e) => status(`failed to load: ${e.message ?? e}`, true));
