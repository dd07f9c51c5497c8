/** Built-in quick-start text shown from the page header. */

export const QUICK_START = `Setup: walk the four steps. Basics covers the physics
(force field, water model, temperature, pressure, timestep, duration, box).
Hardware sizes the cluster job. Advanced holds entries most runs never touch.
Validate at any point; fix anything flagged in red. Warnings are advice, not
blockers. On Review, upload your structure (.pdb or .gro) and download the
generated bundle: a shell script plus your structure, ready to copy to the
cluster and run.

Analysis: point the Analysis tab at a folder on the service host that holds
one structure file and one trajectory (.xtc). Tick the quantities you want,
give the plot a title, and run. Each ticked method becomes one panel; plots
are drawn by the service and shown here exactly as produced.`;

export function renderQuickStart(root: HTMLElement): void {
  const details = document.createElement('details');
  details.className = 'quick-start';
  const summary = document.createElement('summary');
  summary.textContent = 'Quick start';
  details.appendChild(summary);
  const pre = document.createElement('pre');
  pre.textContent = QUICK_START;
  details.appendChild(pre);
  root.appendChild(details);
}
