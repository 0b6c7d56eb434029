/**
 * Top-down scene painter. The curb runs along y = 0 with its band on the far
 * side; the agent is drawn from the latest server pose. Blind mode replaces
 * the scene with a banner, leaving audio untouched.
 */

import { ViewModel, ZONE_COLORS } from "./session.js";

const CM_PER_PX = 1.2;

export function drawScene(ctx: CanvasRenderingContext2D, vm: ViewModel): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, width, height);

  if (!vm.connected) {
    banner(ctx, "connecting…");
    return;
  }
  if (vm.blind) {
    banner(ctx, "blind mode — navigate by audio (B to reveal)");
    return;
  }
  if (vm.scene === null) {
    banner(ctx, "waiting for state…");
    return;
  }

  const originX = width / 2;
  const curbY = height * 0.22;
  const toPx = (cm: number) => cm / CM_PER_PX;

  // curb band (far side of the line)
  ctx.fillStyle = "#3a4754";
  ctx.fillRect(0, curbY - toPx(15), width, toPx(15));
  ctx.strokeStyle = "#dde4ea";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(0, curbY);
  ctx.lineTo(width, curbY);
  ctx.stroke();

  // agent: a triangle pointing along its heading (0 = toward the curb)
  const ax = originX + toPx(vm.scene.x);
  const ay = curbY + toPx(vm.scene.y);
  const heading = (vm.scene.headingDeg * Math.PI) / 180;
  const dir = { x: -Math.sin(heading), y: -Math.cos(heading) };
  ctx.save();
  ctx.translate(ax, ay);
  ctx.rotate(Math.atan2(dir.y, dir.x) + Math.PI / 2);
  ctx.fillStyle = ZONE_COLORS[vm.zone ?? "none"];
  ctx.beginPath();
  ctx.moveTo(0, -12);
  ctx.lineTo(8, 10);
  ctx.lineTo(-8, 10);
  ctx.closePath();
  ctx.fill();
  ctx.restore();

  ctx.fillStyle = "#dde4ea";
  ctx.font = "14px system-ui, sans-serif";
  ctx.fillText(`distance ${vm.scene.distanceCm.toFixed(1)} cm`, 12, height - 56);
  ctx.fillText(`heading ${vm.scene.headingDeg.toFixed(1)}°`, 12, height - 38);
  const orient = vm.orientationDeg === null ? "—" : `${vm.orientationDeg}°`;
  ctx.fillText(`orientation feedback ${orient}`, 12, height - 20);

  // zone indicator
  ctx.fillStyle = ZONE_COLORS[vm.zone ?? "none"];
  ctx.beginPath();
  ctx.arc(width - 28, 28, 12, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillStyle = "#dde4ea";
  ctx.textAlign = "right";
  ctx.fillText(vm.zone ?? "none", width - 48, 33);
  ctx.textAlign = "left";
}

function banner(ctx: CanvasRenderingContext2D, text: string): void {
  ctx.fillStyle = "#dde4ea";
  ctx.font = "16px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(text, ctx.canvas.width / 2, ctx.canvas.height / 2);
  ctx.textAlign = "left";
}
