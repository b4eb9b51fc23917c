/** Dashboard: websites with live counters and their annotation listings.
 *
 * Counter cells carry `data-counter` attributes so tests (and the refresh
 * loop) can address them; every preview is the handle's raw text, shown
 * verbatim in a read-only <pre>.
 */

import type { AnnotationRow, ApiClient, Stats, WebsiteView } from "./api";

const COUNTER_LABELS: Array<[keyof Stats, string]> = [
  ["annotationCount", "Annotations"],
  ["statementCount", "Statements"],
  ["requestCount", "Requests"],
];

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderStats(doc: Document, stats: Stats): HTMLElement {
  const dl = el(doc, "dl", "website-stats");
  for (const [key, label] of COUNTER_LABELS) {
    dl.appendChild(el(doc, "dt", undefined, label));
    const dd = el(doc, "dd");
    dd.setAttribute("data-counter", key);
    dd.textContent = String(stats[key]);
    dl.appendChild(dd);
  }
  return dl;
}

function renderAnnotationTable(
  doc: Document,
  rows: AnnotationRow[],
  onPreview: (hash: string) => void
): HTMLElement {
  const table = el(doc, "table", "annotation-table");
  const head = el(doc, "thead");
  const headRow = el(doc, "tr");
  for (const caption of ["Hash", "CID", "Type", "Statements", "Updated", ""]) {
    headRow.appendChild(el(doc, "th", undefined, caption));
  }
  head.appendChild(headRow);
  table.appendChild(head);
  const body = el(doc, "tbody");
  for (const row of rows) {
    const tr = el(doc, "tr", "annotation-row");
    tr.setAttribute("data-hash", row.hash);
    tr.appendChild(el(doc, "td", "cell-hash", row.hash));
    tr.appendChild(el(doc, "td", "cell-cid", row.cid ?? ""));
    tr.appendChild(el(doc, "td", "cell-type", row.rootType));
    tr.appendChild(el(doc, "td", "cell-statements", String(row.statementCount)));
    tr.appendChild(el(doc, "td", "cell-updated", row.updatedAt));
    const actions = el(doc, "td", "cell-actions");
    const preview = el(doc, "button", "preview-button", "Preview");
    preview.type = "button";
    preview.addEventListener("click", () => onPreview(row.hash));
    actions.appendChild(preview);
    tr.appendChild(actions);
    body.appendChild(tr);
  }
  table.appendChild(body);
  return table;
}

function renderWebsiteSection(
  doc: Document,
  website: WebsiteView,
  rows: AnnotationRow[],
  client: ApiClient
): HTMLElement {
  const section = el(doc, "section", "website-section");
  section.setAttribute("data-website-id", website.websiteId);
  section.appendChild(el(doc, "h2", "website-name", website.displayName));
  const keyLine = el(doc, "p", "website-key-line", "API key: ");
  const key = el(doc, "code", "api-key", website.apiKey);
  keyLine.appendChild(key);
  section.appendChild(keyLine);
  section.appendChild(renderStats(doc, website.counters));
  const previewPane = el(doc, "pre", "annotation-preview");
  previewPane.hidden = true;
  section.appendChild(
    renderAnnotationTable(doc, rows, (hash) => {
      void client.annotationText(hash).then((text) => {
        previewPane.textContent = text;
        previewPane.hidden = false;
        previewPane.setAttribute("data-hash", hash);
      });
    })
  );
  section.appendChild(previewPane);
  return section;
}

export interface DashboardHandle {
  refresh(): Promise<void>;
}

/** Render (and on `refresh()`, re-render) the dashboard into `container`. */
export async function renderDashboard(
  container: HTMLElement,
  client: ApiClient,
  onCreated?: (website: { websiteId: string; apiKey: string }) => void
): Promise<DashboardHandle> {
  const doc = container.ownerDocument!;

  async function draw(): Promise<void> {
    container.textContent = "";
    const root = el(doc, "div", "dashboard");
    const websites = await client.listWebsites();

    if (websites.length === 0) {
      const empty = el(doc, "div", "empty-state");
      empty.appendChild(el(doc, "p", "empty-message", "No websites yet. Create one to start annotating."));
      root.appendChild(empty);
    }

    for (const website of websites) {
      const page = await client.listAnnotations(website.websiteId, 1, 50);
      root.appendChild(renderWebsiteSection(doc, website, page.items, client));
    }

    const createForm = el(doc, "form", "create-website");
    const nameInput = el(doc, "input", "website-name-input");
    nameInput.type = "text";
    nameInput.placeholder = "Website name";
    const submit = el(doc, "button", "create-website-button", "Create website");
    submit.type = "submit";
    createForm.appendChild(nameInput);
    createForm.appendChild(submit);
    createForm.addEventListener("submit", (event) => {
      event.preventDefault();
      const name = nameInput.value.trim();
      if (name === "") return;
      void client.createWebsite(name).then((website) => {
        if (onCreated) onCreated(website);
        return draw();
      });
    });
    root.appendChild(createForm);
    container.appendChild(root);
  }

  await draw();
  return { refresh: draw };
}
