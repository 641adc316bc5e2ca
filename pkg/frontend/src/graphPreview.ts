export interface GraphPreview {
  name: string;
  nodes: number;
  edges: number;
  labels: Record<string, number>;
}

/** Lightweight client-side summary of a graph document (counts + label
 * histogram); full validation stays on the server. */
export function previewGraph(document: string): GraphPreview {
  const preview: GraphPreview = { name: "", nodes: 0, edges: 0, labels: {} };
  for (const raw of document.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const tokens = line.split(/\s+/);
    if (tokens[0] === "graph" && tokens[1]) {
      preview.name = tokens[1];
    } else if (tokens[0] === "node") {
      preview.nodes += 1;
      const label = tokens.slice(2).join(" ") || "_";
      preview.labels[label] = (preview.labels[label] ?? 0) + 1;
    } else if (tokens[0] === "edge") {
      preview.edges += 1;
    }
  }
  return preview;
}

export function labelSummary(preview: GraphPreview, limit = 5): string {
  const entries = Object.entries(preview.labels)
    .sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]))
    .slice(0, limit)
    .map(([label, count]) => `${label}x${count}`);
  return entries.join(" ");
}
