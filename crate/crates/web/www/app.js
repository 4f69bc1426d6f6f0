import init, { sceneLength, renderFrame, detectFrame, trackScene } from "./pkg/pedtrack_web.js";

const $ = (id) => document.getElementById(id);

function paint(canvas, image) {
  canvas.width = image.width;
  canvas.height = image.height;
  const data = new ImageData(new Uint8ClampedArray(image.rgba), image.width, image.height);
  canvas.getContext("2d").putImageData(data, 0, 0);
}

function preset() {
  return $("preset").value;
}

function seed() {
  return Number($("seed").value) >>> 0;
}

function showValues() {
  for (const id of ["t", "threshold", "radius", "area"]) {
    $(`${id}-out`).textContent = $(id).value;
  }
}

function redraw() {
  showValues();
  const t = Number($("t").value);
  try {
    paint($("frame"), renderFrame(preset(), seed(), t));
    const mask = detectFrame(preset(), seed(), t, Number($("threshold").value), Number($("radius").value), Number($("area").value));
    paint($("mask"), mask);
    $("blobs").textContent = mask.blobs;
  } catch (e) {
    $("blobs").textContent = e.message;
  }
}

function resetScene() {
  const n = sceneLength(preset());
  $("t").max = n - 1;
  if (Number($("t").value) > n - 1) $("t").value = Math.floor(n / 2);
  redraw();
}

function drawPaths(csv, width, height) {
  const canvas = $("paths");
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, width, height);
  const tracks = new Map();
  for (const line of csv.trim().split("\n").slice(1)) {
    const [n, , y, x] = line.split(",").map(Number);
    if (!tracks.has(n)) tracks.set(n, []);
    tracks.get(n).push([x, y]);
  }
  for (const [n, points] of tracks) {
    ctx.strokeStyle = `hsl(${(n * 67) % 360}, 80%, 60%)`;
    ctx.beginPath();
    points.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
    ctx.stroke();
    const [x, y] = points[0];
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(String(n), x + 3, y - 3);
  }
}

function runTracking() {
  $("summary").textContent = "tracking...";
  setTimeout(() => {
    try {
      const start = performance.now();
      const r = trackScene(preset(), seed(), Number($("threshold").value), Number($("limit").value));
      const ms = (performance.now() - start).toFixed(0);
      $("summary").textContent =
        `${r.frames} frames, ${r.tracks} tracks, accuracy ${(r.accuracy * 100).toFixed(1)}%, ` +
        `id switches ${r.id_switches} (${ms} ms)`;
      const frame = renderFrame(preset(), seed(), 0);
      drawPaths(r.ntyx, frame.width, frame.height);
      $("ntyx").textContent = r.ntyx;
    } catch (e) {
      $("summary").textContent = e.message;
    }
  }, 0);
}

await init();
for (const id of ["t", "threshold", "radius", "area", "seed"]) {
  $(id).addEventListener("input", redraw);
}
$("preset").addEventListener("change", resetScene);
$("track").addEventListener("click", runTracking);
resetScene();
