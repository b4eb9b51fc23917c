/** End-to-end tests against a real API server process.
 *
 * A fresh server is spawned on a free port with a seeded organization, user
 * and website. The editor closure is exercised per bundled domain spec:
 * render the served form schema, fill it, validate, push, then assert the
 * bytes the server serves back equal the editor's canonical preview.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { createServer, type AddressInfo } from "node:net";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api";
import type { AnnotationDoc, DsJson, FormFieldJson, FormSchemaJson } from "../src/api";
import { renderDashboard } from "../src/dashboard";
import { canonicalText, documentFromValues, valuesFromDocument } from "../src/editor";
import type { FieldValue } from "../src/form";
import { addRow, collectValues, populateForm, renderForm } from "../src/form";
import { boot } from "../src/main";

const HERE = dirname(fileURLToPath(import.meta.url));
const DS_DIR = resolve(HERE, "../../src/annohub/wrapper/data");
const DS_FILES = ["lodging_ds.json", "article_ds.json"];

const EMAIL = "owner@example.com";
const PASSWORD = "hunter2";
const API_KEY = "KEY-DEMO";
const WEBSITE_ID = "site-demo";

const fetchFn: typeof fetch = (...args) => fetch(...args);

let proc: ChildProcess | undefined;
let baseUrl = "";
let workDir = "";
let stderrBuf = "";
const dsIds: Record<string, string> = {};
const pushed: Array<{ file: string; dsId: string; hash: string }> = [];

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as AddressInfo).port;
      probe.close(() => resolvePort(port));
    });
  });
}

async function login(): Promise<ApiClient> {
  const client = new ApiClient(baseUrl, fetchFn);
  await client.login(EMAIL, PASSWORD);
  return client;
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "annohub-ui-"));
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  const configPath = join(workDir, "config.json");
  writeFileSync(
    configPath,
    JSON.stringify({
      host: "127.0.0.1",
      port,
      tokenSecret: "integration-suite-secret",
      seed: {
        organizations: ["Acme"],
        users: [{ email: EMAIL, password: PASSWORD, organization: "Acme" }],
        websites: [
          {
            organization: "Acme",
            displayName: "Demo site",
            websiteId: WEBSITE_ID,
            apiKey: API_KEY,
          },
        ],
      },
    })
  );

  proc = spawn("python3", ["-c", "from annohub.api import main; main()", "--config", configPath], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  proc.stderr!.on("data", (chunk) => {
    stderrBuf += String(chunk);
  });

  const deadline = Date.now() + 60_000;
  for (;;) {
    if (proc.exitCode !== null) throw new Error(`server exited early:\n${stderrBuf}`);
    try {
      const resp = await fetch(`${baseUrl}/`);
      if (resp.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) throw new Error(`server did not come up:\n${stderrBuf}`);
    await new Promise((r) => setTimeout(r, 250));
  }

  const client = await login();
  for (const file of DS_FILES) {
    const ds: DsJson = JSON.parse(readFileSync(join(DS_DIR, file), "utf-8"));
    const saved = await client.saveDs(ds);
    dsIds[file] = saved.dsId;
  }
}, 90_000);

afterAll(() => {
  proc?.kill("SIGTERM");
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

// --- generic form filler (walks the rendered DOM in schema order) -----------

let stamp = 0;

function fillInput(input: HTMLInputElement, field: FormFieldJson, rowIndex: number): void {
  stamp += 1;
  switch (field.widget) {
    case "checkbox":
      input.checked = true;
      break;
    case "number":
      input.value = String(7 + rowIndex);
      break;
    case "date":
      input.value = "2026-08-15";
      break;
    case "datetime":
      input.value = "2026-08-15T10:30";
      break;
    case "url":
      input.value = `https://example.com/${field.propertyToken}/${stamp}`;
      break;
    default:
      input.value = `Sample ${field.propertyToken} ${stamp}`;
  }
}

function ownGroups(container: Element): HTMLElement[] {
  return Array.from(container.children).filter((el): el is HTMLElement =>
    el.classList.contains("field-group")
  );
}

function fillGroup(group: HTMLElement, field: FormFieldJson): void {
  if (field.multiplicity === "many") addRow(group); // exercise arrays with two rows
  const rowsEl = Array.from(group.children).find((el) => el.classList.contains("rows"))!;
  Array.from(rowsEl.children).forEach((row, rowIndex) => {
    if (field.widget === "subform" && field.subform) {
      const nested = row.querySelector(":scope > .subform-fields")!;
      const groups = ownGroups(nested);
      field.subform.fields.forEach((inner, index) => fillGroup(groups[index], inner));
    } else {
      const input = row.querySelector<HTMLInputElement>(":scope > .field-input")!;
      fillInput(input, field, rowIndex);
    }
  });
}

function fillForm(form: HTMLFormElement, schema: FormSchemaJson): void {
  const groups = ownGroups(form);
  schema.fields.forEach((field, index) => fillGroup(groups[index], field));
}

// --- editor closure ----------------------------------------------------------

describe("editor closure against the live API", () => {
  for (const file of DS_FILES) {
    it(`fill, validate, push, and read back identical bytes (${file})`, async () => {
      const client = await login();
      const dsId = dsIds[file];
      const ds = await client.getDs(dsId);
      const schema = await client.getForm(dsId);

      const form = renderForm(schema, document);
      fillForm(form, schema);
      const values = collectValues(form, schema);
      const doc = documentFromValues(ds, values);

      const report = await client.validate(API_KEY, dsId, doc);
      expect(report.violations).toEqual([]);
      expect(report.ok).toBe(true);

      const result = await client.pushAnnotation(API_KEY, doc);
      expect(result.created).toBe(true);
      expect(result.hash).toMatch(/^[A-Za-z0-9]{9}$/);

      const served = await client.annotationText(result.hash);
      expect(served).toBe(canonicalText(doc));
      pushed.push({ file, dsId, hash: result.hash });
    });
  }

  it("editing without changes keeps the served bytes identical", async () => {
    expect(pushed.length).toBeGreaterThan(0);
    const client = await login();
    const { dsId, hash } = pushed[0];
    const before = await client.annotationText(hash);

    const ds = await client.getDs(dsId);
    const schema = await client.getForm(dsId);
    const meta = await client.annotationMeta(hash);
    const { values, unknown } = valuesFromDocument(ds, meta.body);
    expect(unknown).toEqual([]);

    const form = renderForm(schema, document);
    populateForm(form, schema, values, document);
    const doc = documentFromValues(ds, collectValues(form, schema));
    expect(canonicalText(doc)).toBe(before);

    await client.replaceAnnotation(hash, doc, meta.cid ?? undefined);
    expect(await client.annotationText(hash)).toBe(before);
  });
});

// --- dashboard consistency -----------------------------------------------------

describe("dashboard against the live API", () => {
  it("mirrors the live counters and annotation listing", async () => {
    const client = await login();
    for (let i = 0; i < 3; i += 1) {
      const doc: AnnotationDoc = {
        "@context": "http://schema.org",
        "@type": "Article",
        headline: `Scripted upload ${i}`,
        keywords: ["alpine", "guide"],
      };
      const result = await client.pushAnnotation(API_KEY, doc, `scripted-${i}-en`);
      expect(result.created).toBe(true);
    }

    const stats = await client.websiteStats(WEBSITE_ID);
    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderDashboard(host, client);

    const section = host.querySelector(`[data-website-id="${WEBSITE_ID}"]`);
    expect(section).not.toBeNull();
    const cell = (key: string) =>
      section!.querySelector(`[data-counter="${key}"]`)!.textContent;
    expect(cell("annotationCount")).toBe(String(stats.annotationCount));
    expect(cell("statementCount")).toBe(String(stats.statementCount));
    expect(cell("requestCount")).toBe(String(stats.requestCount));

    const rows = section!.querySelectorAll(".annotation-row");
    expect(rows.length).toBe(stats.annotationCount);
    for (const row of Array.from(rows)) {
      expect(row.getAttribute("data-hash")).toMatch(/^[A-Za-z0-9]{9}$/);
    }
    expect(section!.querySelector("code.api-key")!.textContent).toBe(API_KEY);
  });

  it("preview shows exactly the bytes the public endpoint serves", async () => {
    const client = await login();
    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderDashboard(host, client);

    const row = host.querySelector(".annotation-row")!;
    const hash = row.getAttribute("data-hash")!;
    const expected = await client.annotationText(hash);

    row.querySelector<HTMLButtonElement>(".preview-button")!.click();
    await vi.waitFor(() => {
      const pre = host.querySelector<HTMLPreElement>(".annotation-preview")!;
      expect(pre.hidden).toBe(false);
      expect(pre.getAttribute("data-hash")).toBe(hash);
      expect(pre.textContent).toBe(expected);
    });
  });

  it("editing one field moves the statement counter by exactly its delta", async () => {
    const article = pushed.find((p) => p.file === "article_ds.json");
    expect(article).toBeDefined();
    const client = await login();
    const ds = await client.getDs(article!.dsId);
    const meta = await client.annotationMeta(article!.hash);
    const { values } = valuesFromDocument(ds, meta.body);
    (values.keywords as FieldValue[]).push("one more keyword");
    const doc = documentFromValues(ds, values);

    const before = await client.websiteStats(WEBSITE_ID);
    await client.replaceAnnotation(article!.hash, doc);
    const after = await client.websiteStats(WEBSITE_ID);
    expect(after.annotationCount).toBe(before.annotationCount);
    expect(after.statementCount - before.statementCount).toBe(1);
    expect(after.requestCount).toBe(before.requestCount);

    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderDashboard(host, client);
    const cell = host.querySelector(
      `[data-website-id="${WEBSITE_ID}"] [data-counter="statementCount"]`
    )!;
    expect(cell.textContent).toBe(String(after.statementCount));
  });
});

// --- full boot flow --------------------------------------------------------------

describe("application boot against the live API", () => {
  it("logs in, mounts all panels, and saves through the editor UI", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = await boot(root, baseUrl, { email: EMAIL, password: PASSWORD }, fetchFn);

    expect(root.querySelector(`.website-section[data-website-id="${WEBSITE_ID}"]`)).not.toBeNull();

    const dsSelect = root.querySelector<HTMLSelectElement>(".ds-select")!;
    expect(dsSelect.options.length).toBe(DS_FILES.length);
    const websiteSelect = root.querySelector<HTMLSelectElement>(".website-select")!;
    expect(websiteSelect.value).toBe(API_KEY);

    const classSelect = root.querySelector<HTMLSelectElement>(".ds-class-select")!;
    expect(classSelect.options.length).toBeGreaterThan(10);

    const form = root.querySelector<HTMLFormElement>(".editor-form-host form")!;
    expect(form).not.toBeNull();
    const saveButton = root.querySelector<HTMLButtonElement>(".save-button")!;
    expect(saveButton.disabled).toBe(true);

    const schema = await app.client.getForm(dsSelect.value);
    fillForm(form, schema);
    form.dispatchEvent(new Event("input", { bubbles: true }));
    await vi.waitFor(() => expect(saveButton.disabled).toBe(false));

    const previewBefore = root.querySelector<HTMLPreElement>(".editor-preview")!.textContent;
    expect(previewBefore).toContain('"@context":"http://schema.org"');

    saveButton.click();
    const status = root.querySelector<HTMLElement>(".editor-status")!;
    await vi.waitFor(() => {
      expect(status.getAttribute("data-state")).toBe("saved");
      expect(status.getAttribute("data-hash")).toMatch(/^[A-Za-z0-9]{9}$/);
    });

    const hash = status.getAttribute("data-hash")!;
    const served = await app.client.annotationText(hash);
    expect(served).toBe(root.querySelector<HTMLPreElement>(".editor-preview")!.textContent);
  });
});
