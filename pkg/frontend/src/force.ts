// Small force-directed layout: spring edges, pairwise repulsion,
// centering gravity. O(n^2) per tick is fine at the node budgets the
// server enforces for halo responses.

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
}

export interface LayoutEdge {
  source: string;
  target: string;
}

const SPRING = 0.04;
const REST_LENGTH = 110;
const REPULSION = 5200;
const GRAVITY = 0.012;
const DAMPING = 0.82;
const MAX_SPEED = 14;

export class ForceLayout {
  nodes = new Map<string, LayoutNode>();
  edges: LayoutEdge[] = [];

  constructor(
    private width: number,
    private height: number,
  ) {}

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }

  /** Keep layout positions for survivors; seed newcomers near a neighbor. */
  sync(ids: string[], edges: LayoutEdge[]): void {
    const keep = new Set(ids);
    for (const id of [...this.nodes.keys()]) {
      if (!keep.has(id)) this.nodes.delete(id);
    }
    this.edges = edges.filter((e) => keep.has(e.source) && keep.has(e.target));
    const neighborOf = new Map<string, string>();
    for (const e of this.edges) {
      if (!neighborOf.has(e.source)) neighborOf.set(e.source, e.target);
      if (!neighborOf.has(e.target)) neighborOf.set(e.target, e.source);
    }
    let i = 0;
    for (const id of ids) {
      if (this.nodes.has(id)) continue;
      const anchor = this.nodes.get(neighborOf.get(id) ?? "");
      const angle = (i * 2.399963) % (2 * Math.PI); // golden-angle spread
      const cx = anchor ? anchor.x : this.width / 2;
      const cy = anchor ? anchor.y : this.height / 2;
      this.nodes.set(id, {
        id,
        x: cx + Math.cos(angle) * 60 + (i % 7),
        y: cy + Math.sin(angle) * 60 + (i % 5),
        vx: 0,
        vy: 0,
        pinned: false,
      });
      i += 1;
    }
  }

  tick(): void {
    const nodes = [...this.nodes.values()];
    for (let a = 0; a < nodes.length; a++) {
      for (let b = a + 1; b < nodes.length; b++) {
        const na = nodes[a];
        const nb = nodes[b];
        let dx = na.x - nb.x;
        let dy = na.y - nb.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          dx = (Math.random() - 0.5) * 2;
          dy = (Math.random() - 0.5) * 2;
          d2 = dx * dx + dy * dy;
        }
        const force = REPULSION / d2;
        const d = Math.sqrt(d2);
        const fx = (dx / d) * force;
        const fy = (dy / d) * force;
        na.vx += fx;
        na.vy += fy;
        nb.vx -= fx;
        nb.vy -= fy;
      }
    }
    for (const e of this.edges) {
      const s = this.nodes.get(e.source);
      const t = this.nodes.get(e.target);
      if (!s || !t) continue;
      const dx = t.x - s.x;
      const dy = t.y - s.y;
      const d = Math.max(1, Math.sqrt(dx * dx + dy * dy));
      const stretch = (d - REST_LENGTH) * SPRING;
      const fx = (dx / d) * stretch;
      const fy = (dy / d) * stretch;
      s.vx += fx;
      s.vy += fy;
      t.vx -= fx;
      t.vy -= fy;
    }
    for (const n of this.nodes.values()) {
      if (n.pinned) {
        n.vx = 0;
        n.vy = 0;
        continue;
      }
      n.vx += (this.width / 2 - n.x) * GRAVITY;
      n.vy += (this.height / 2 - n.y) * GRAVITY;
      n.vx *= DAMPING;
      n.vy *= DAMPING;
      const speed = Math.sqrt(n.vx * n.vx + n.vy * n.vy);
      if (speed > MAX_SPEED) {
        n.vx = (n.vx / speed) * MAX_SPEED;
        n.vy = (n.vy / speed) * MAX_SPEED;
      }
      n.x += n.vx;
      n.y += n.vy;
    }
  }
}
