// Built with: wasm-pack build crates/wasm --target web --out-dir www/pkg
import init, { spectrum_point, detuning_scan, noise_scan } from "./pkg/psr_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function drive() {
  return { preset: $("preset").value, omega: num("omega"), gamma0: num("gamma0"), coop: num("coop") };
}

function report(e) {
  $("status").textContent = e ? String(e) : "";
}

function plot(rows, label) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const ok = rows.filter((r) => r.error === undefined);
  if (ok.length === 0) return;
  const xs = ok.map((r) => r.x);
  const ys = ok.flatMap((r) => [r.s_min_db, r.s_max_db]).concat([0]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0));
  ctx.lineTo(w - pad, sy(0));
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText(`${y1.toFixed(2)} dB`, 2, sy(y1) + 10);
  ctx.fillText(`${y0.toFixed(2)} dB`, 2, sy(y0));
  ctx.fillText(x0.toFixed(2), pad, h - pad + 15);
  ctx.fillText(x1.toFixed(2), w - pad - 30, h - pad + 15);

  for (const [key, color] of [["s_min_db", "#1565c0"], ["s_max_db", "#c62828"]]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ok.forEach((r, i) => (i ? ctx.lineTo(sx(r.x), sy(r[key])) : ctx.moveTo(sx(r.x), sy(r[key]))));
    ctx.stroke();
  }
  $("axis").textContent = `horizontal axis: ${label}`;
  const failed = rows.length - ok.length;
  report(failed ? `${failed} points failed (${rows.find((r) => r.error).message})` : "");
}

function guarded(f) {
  return () => {
    try {
      f();
    } catch (e) {
      report(e);
    }
  };
}

await init();

$("run-point").onclick = guarded(() => {
  const d = drive();
  const r = JSON.parse(spectrum_point(d.preset, d.omega, num("p-detuning"), d.gamma0, d.coop, num("p-delta")));
  $("point-out").textContent = r.error
    ? r.message
    : `S_min ${r.s_min_db.toFixed(3)} dB, S_max ${r.s_max_db.toFixed(3)} dB, θ_min ${r.theta_min.toFixed(3)} rad`;
  report("");
});

$("run-detuning").onclick = guarded(() => {
  const d = drive();
  const rows = JSON.parse(
    detuning_scan(d.preset, d.omega, d.gamma0, d.coop, num("d-delta"), num("d-start"), num("d-stop"), num("d-steps")),
  );
  plot(rows, "pump detuning Δ / Γ");
});

$("run-noise").onclick = guarded(() => {
  const d = drive();
  const rows = JSON.parse(
    noise_scan(d.preset, d.omega, num("n-detuning"), d.gamma0, d.coop, num("n-start"), num("n-stop"), num("n-steps")),
  );
  plot(rows, "sideband frequency δ / Γ");
});
