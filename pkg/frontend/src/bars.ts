import type { ClassProbability } from './types';

/**
 * Render one horizontal bar per class, in catalog order, with the Arabic
 * class name (English gloss as tooltip), the percentage, and, when a
 * baseline is pinned, a delta badge baseline -> current.
 */
export function renderBars(
  root: HTMLElement,
  entries: ClassProbability[],
  baseline?: number[],
): void {
  root.textContent = '';
  entries.forEach((entry, index) => {
    const row = root.ownerDocument.createElement('div');
    row.className = 'bar-row';
    row.dataset.probability = String(entry.probability);

    const label = root.ownerDocument.createElement('span');
    label.className = 'bar-label';
    label.textContent = entry.name;
    label.title = entry.gloss;
    row.appendChild(label);

    const track = root.ownerDocument.createElement('div');
    track.className = 'bar-track';
    const fill = root.ownerDocument.createElement('div');
    fill.className = 'bar-fill';
    fill.style.width = `${(entry.probability * 100).toFixed(1)}%`;
    track.appendChild(fill);
    row.appendChild(track);

    const pct = root.ownerDocument.createElement('span');
    pct.className = 'bar-pct';
    pct.textContent = `${(entry.probability * 100).toFixed(1)}%`;
    row.appendChild(pct);

    const base = baseline?.[index];
    if (base !== undefined) {
      const delta = entry.probability - base;
      const badge = root.ownerDocument.createElement('span');
      badge.className =
        'bar-delta ' + (delta > 0 ? 'delta-up' : delta < 0 ? 'delta-down' : 'delta-flat');
      const signed = `${delta >= 0 ? '+' : ''}${(delta * 100).toFixed(1)}`;
      badge.textContent = `${signed} pp`;
      badge.dataset.delta = String(delta);
      row.appendChild(badge);
    }

    root.appendChild(row);
  });
}
