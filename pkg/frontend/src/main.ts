/** Application shell: login, then dashboard + annotation editor + DS builder.
 *
 * `boot(root, baseUrl)` is the composition root; the DOM auto-boot at the
 * bottom only fires when the host page provides `#annohub-app` (so importing
 * this module in tests has no side effects).
 */

import { ApiClient } from "./api";
import type { AnnotationDoc, DsListRow, WebsiteView } from "./api";
import { renderDashboard } from "./dashboard";
import type { DashboardHandle } from "./dashboard";
import { renderDsBuilder } from "./dsbuilder";
import {
  applyViolations,
  canonicalText,
  clearViolations,
  documentFromValues,
  missingRequired,
  renderUnknownNotices,
  requiredComplete,
  valuesFromDocument,
} from "./editor";
import { collectValues, populateForm, renderForm } from "./form";

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

interface EditorElements {
  dsSelect: HTMLSelectElement;
  websiteSelect: HTMLSelectElement;
  hashInput: HTMLInputElement;
  cidInput: HTMLInputElement;
  loadButton: HTMLButtonElement;
  formHost: HTMLElement;
  noticeHost: HTMLElement;
  preview: HTMLPreElement;
  saveButton: HTMLButtonElement;
  status: HTMLElement;
}

function buildEditorShell(doc: Document, host: HTMLElement): EditorElements {
  const section = el(doc, "section", "editor-section");

  const controls = el(doc, "div", "editor-controls");
  const dsSelect = el(doc, "select", "ds-select");
  const websiteSelect = el(doc, "select", "website-select");
  const hashInput = el(doc, "input", "hash-input");
  hashInput.type = "text";
  hashInput.placeholder = "Annotation hash (optional, for editing)";
  const cidInput = el(doc, "input", "cid-input");
  cidInput.type = "text";
  cidInput.placeholder = "Content id (optional)";
  const loadButton = el(doc, "button", "load-button", "Load");
  loadButton.type = "button";
  controls.appendChild(dsSelect);
  controls.appendChild(websiteSelect);
  controls.appendChild(hashInput);
  controls.appendChild(cidInput);
  controls.appendChild(loadButton);
  section.appendChild(controls);

  const formHost = el(doc, "div", "editor-form-host");
  section.appendChild(formHost);
  const noticeHost = el(doc, "div", "editor-notices");
  section.appendChild(noticeHost);

  const preview = el(doc, "pre", "editor-preview");
  section.appendChild(preview);

  const saveButton = el(doc, "button", "save-button", "Validate and save");
  saveButton.type = "button";
  saveButton.disabled = true;
  section.appendChild(saveButton);

  const status = el(doc, "div", "editor-status");
  section.appendChild(status);

  host.appendChild(section);
  return {
    dsSelect,
    websiteSelect,
    hashInput,
    cidInput,
    loadButton,
    formHost,
    noticeHost,
    preview,
    saveButton,
    status,
  };
}

export interface AppHandle {
  client: ApiClient;
  dashboard: DashboardHandle;
  /** Re-render the annotation form for the currently selected DS. */
  reloadEditor(): Promise<void>;
}

async function startEditor(
  doc: Document,
  host: HTMLElement,
  client: ApiClient,
  websites: WebsiteView[],
  dsRows: DsListRow[],
  onSaved: () => void
): Promise<() => Promise<void>> {
  const ui = buildEditorShell(doc, host);
  for (const row of dsRows) {
    const option = el(doc, "option", undefined, `${row.name} (${row.targetType})`);
    option.value = row.dsId;
    ui.dsSelect.appendChild(option);
  }
  for (const site of websites) {
    const option = el(doc, "option", undefined, site.displayName);
    option.value = site.apiKey;
    ui.websiteSelect.appendChild(option);
  }

  let editingHash: string | null = null;

  async function reload(): Promise<void> {
    const dsId = ui.dsSelect.value;
    if (!dsId) return;
    const [ds, schema] = await Promise.all([client.getDs(dsId), client.getForm(dsId)]);
    ui.formHost.textContent = "";
    ui.noticeHost.textContent = "";
    ui.status.textContent = "";
    const form = renderForm(schema, doc);
    ui.formHost.appendChild(form);

    function refreshPreview(): void {
      const values = collectValues(form, schema);
      const document_ = documentFromValues(ds, values);
      ui.preview.textContent = canonicalText(document_);
      const complete = requiredComplete(ds, values);
      ui.saveButton.disabled = !complete;
      ui.status.setAttribute(
        "data-missing",
        complete ? "" : missingRequired(ds, values).join(",")
      );
    }

    form.addEventListener("input", refreshPreview);
    form.addEventListener("change", refreshPreview);
    form.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      if (target.classList.contains("add-row") || target.classList.contains("remove-row")) {
        refreshPreview();
      }
    });

    if (editingHash) {
      const meta = await client.annotationMeta(editingHash);
      const { values, unknown } = valuesFromDocument(ds, meta.body);
      populateForm(form, schema, values);
      renderUnknownNotices(ui.noticeHost, unknown);
      if (meta.cid) ui.cidInput.value = meta.cid;
    }
    refreshPreview();

    ui.saveButton.onclick = () => {
      void (async () => {
        clearViolations(form);
        ui.status.textContent = "";
        const values = collectValues(form, schema);
        const document_: AnnotationDoc = documentFromValues(ds, values);
        const apiKey = ui.websiteSelect.value;
        const report = await client.validate(apiKey, dsId, document_);
        if (!report.ok) {
          applyViolations(form, report);
          ui.status.textContent = `validation failed: ${report.violations.length} violation(s)`;
          ui.status.setAttribute("data-state", "invalid");
          return;
        }
        const cid = ui.cidInput.value.trim() || undefined;
        if (editingHash) {
          await client.replaceAnnotation(editingHash, document_, cid);
          ui.status.textContent = `updated ${editingHash}`;
          ui.status.setAttribute("data-hash", editingHash);
        } else {
          const result = await client.pushAnnotation(apiKey, document_, cid);
          ui.status.textContent = `${result.created ? "created" : "replaced"} ${result.hash}`;
          ui.status.setAttribute("data-hash", result.hash);
          editingHash = result.hash;
          ui.hashInput.value = result.hash;
        }
        ui.status.setAttribute("data-state", "saved");
        onSaved();
      })();
    };
  }

  ui.loadButton.addEventListener("click", () => {
    editingHash = ui.hashInput.value.trim() || null;
    void reload();
  });
  ui.dsSelect.addEventListener("change", () => {
    editingHash = null;
    ui.hashInput.value = "";
    void reload();
  });

  await reload();
  return reload;
}

/** Log in and mount the full UI. Returns handles the tests drive directly. */
export async function boot(
  root: HTMLElement,
  baseUrl: string,
  credentials: { email: string; password: string },
  fetchFn?: typeof fetch
): Promise<AppHandle> {
  const doc = root.ownerDocument!;
  root.textContent = "";
  const client = new ApiClient(baseUrl, fetchFn);
  await client.login(credentials.email, credentials.password);

  const dashboardHost = el(doc, "div", "dashboard-host");
  const editorHost = el(doc, "div", "editor-host");
  const builderHost = el(doc, "div", "builder-host");
  root.appendChild(dashboardHost);
  root.appendChild(editorHost);
  root.appendChild(builderHost);

  const dashboard = await renderDashboard(dashboardHost, client);
  const [websites, dsRows] = await Promise.all([client.listWebsites(), client.listDs()]);
  const reloadEditor =
    websites.length > 0 && dsRows.length > 0
      ? await startEditor(doc, editorHost, client, websites, dsRows, () => void dashboard.refresh())
      : async () => {};

  await renderDsBuilder(builderHost, client, (ds) => {
    void client.saveDs(ds).then(() => dashboard.refresh());
  });

  return { client, dashboard, reloadEditor };
}

const autoHost = typeof document !== "undefined" ? document.getElementById("annohub-app") : null;
if (autoHost) {
  const baseUrl = autoHost.getAttribute("data-base-url") ?? "";
  const email = autoHost.getAttribute("data-email") ?? "";
  const password = autoHost.getAttribute("data-password") ?? "";
  void boot(autoHost, baseUrl, { email, password });
}
