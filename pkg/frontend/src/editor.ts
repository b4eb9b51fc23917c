/** Editor core: deterministic (DS, form values) -> annotation document.
 *
 * Document generation walks the domain specification itself (not the form
 * schema), so nested type tokens are always exact. Repopulation inverts the
 * mapping for edit-by-overwrite; document properties the DS does not know
 * are surfaced as read-only notices, never silently dropped.
 */

import type {
  AnnotationDoc,
  ConstraintJson,
  DocValue,
  DsJson,
  ScalarValue,
  ValidationReport,
} from "./api";
import type { FieldValue, FormValues } from "./form";

export const CONTEXT = "http://schema.org";

export interface EditorState {
  selectedDs: string;
  ds: DsJson;
  values: FormValues;
  dirty: boolean;
}

export interface UnknownProperty {
  path: string;
  property: string;
  value: DocValue;
}

function nestedAlternative(constraint: ConstraintJson, typeToken?: string) {
  const nested = constraint.ranges.filter((r) => r.kind === "nestedType" && r.nestedType);
  if (typeToken !== undefined) {
    const exact = nested.find((r) => r.nestedType!.type === typeToken);
    if (exact) return exact.nestedType!;
  }
  return nested.length > 0 ? nested[0].nestedType! : null;
}

function buildValue(constraint: ConstraintJson, value: FieldValue): DocValue | undefined {
  if (typeof value === "object" && !Array.isArray(value)) {
    const alternative = nestedAlternative(constraint);
    if (!alternative) return undefined;
    const node = buildNode(alternative.type, alternative.constraints, value as FormValues);
    return Object.keys(node).length > 1 ? node : undefined; // drop a bare {"@type": ...} shell
  }
  return value as ScalarValue;
}

function buildNode(typeToken: string, constraints: ConstraintJson[], values: FormValues): AnnotationDoc {
  const node: AnnotationDoc = { "@type": typeToken };
  for (const constraint of constraints) {
    const value = values[constraint.property];
    if (value === undefined) continue;
    if (Array.isArray(value)) {
      const items = value
        .map((item) => buildValue(constraint, item))
        .filter((item): item is DocValue => item !== undefined) as Array<ScalarValue | AnnotationDoc>;
      if (items.length > 0) node[constraint.property] = items;
    } else {
      const built = buildValue(constraint, value);
      if (built !== undefined) node[constraint.property] = built;
    }
  }
  return node;
}

/** The preview/save document. Regenerating from the same (ds, values) is
 * deterministic; profile conformance holds by construction. */
export function documentFromValues(ds: DsJson, values: FormValues): AnnotationDoc {
  const node = buildNode(ds.targetType, ds.constraints, values);
  return { "@context": CONTEXT, ...node };
}

function valuesFromNode(
  constraints: ConstraintJson[],
  node: AnnotationDoc,
  prefix: string,
  unknown: UnknownProperty[]
): FormValues {
  const known = new Map(constraints.map((c) => [c.property, c]));
  const values: FormValues = {};
  for (const [property, raw] of Object.entries(node)) {
    if (property.startsWith("@")) continue;
    const path = prefix === "" ? property : `${prefix}.${property}`;
    const constraint = known.get(property);
    if (!constraint) {
      unknown.push({ path, property, value: raw });
      continue;
    }
    const items = Array.isArray(raw) ? raw : [raw];
    const converted: FieldValue[] = items.map((item) => {
      if (item !== null && typeof item === "object" && !Array.isArray(item)) {
        const doc = item as AnnotationDoc;
        const alternative = nestedAlternative(constraint, doc["@type"] as string | undefined);
        return valuesFromNode(alternative ? alternative.constraints : [], doc, path, unknown);
      }
      return item as ScalarValue;
    });
    values[property] = constraint.multiplicity === "many" || Array.isArray(raw) ? converted : converted[0];
  }
  return values;
}

/** Invert a stored document into form values for edit-by-repopulation. */
export function valuesFromDocument(
  ds: DsJson,
  doc: AnnotationDoc
): { values: FormValues; unknown: UnknownProperty[] } {
  const unknown: UnknownProperty[] = [];
  const values = valuesFromNode(ds.constraints, doc, "", unknown);
  return { values, unknown };
}

function hasValue(value: FieldValue | FieldValue[] | undefined, constraint: ConstraintJson): boolean {
  if (value === undefined) return false;
  const items = Array.isArray(value) ? value : [value];
  if (items.length === 0) return false;
  const alternative = nestedAlternative(constraint);
  if (!alternative) return true;
  // a required nested value needs its own required fields filled
  return items.every((item) =>
    typeof item === "object" && !Array.isArray(item)
      ? requiredFilled(alternative.constraints, item as FormValues)
      : true
  );
}

function requiredFilled(constraints: ConstraintJson[], values: FormValues): boolean {
  return constraints
    .filter((c) => c.required)
    .every((c) => hasValue(values[c.property], c));
}

/** Save gate: every required field (recursively) holds a value. */
export function requiredComplete(ds: DsJson, values: FormValues): boolean {
  return requiredFilled(ds.constraints, values);
}

/** Names of root-level required properties still missing (for inline markers). */
export function missingRequired(ds: DsJson, values: FormValues): string[] {
  return ds.constraints
    .filter((c) => c.required && !hasValue(values[c.property], c))
    .map((c) => c.property);
}

const KEY_ORDER = ["@context", "@type", "@id"];

function canonicalValue(value: DocValue): DocValue {
  if (Array.isArray(value)) return value.map((item) => canonicalValue(item)) as DocValue;
  if (value !== null && typeof value === "object") return canonicalNode(value as AnnotationDoc);
  return value;
}

function canonicalNode(node: AnnotationDoc): AnnotationDoc {
  const keys = Object.keys(node).sort((a, b) => {
    const ia = KEY_ORDER.indexOf(a);
    const ib = KEY_ORDER.indexOf(b);
    if (ia !== -1 || ib !== -1) {
      return (ia === -1 ? KEY_ORDER.length : ia) - (ib === -1 ? KEY_ORDER.length : ib) || a.localeCompare(b);
    }
    return a < b ? -1 : a > b ? 1 : 0;
  });
  const out: AnnotationDoc = {};
  for (const key of keys) out[key] = canonicalValue(node[key]);
  return out;
}

/** Canonical preview text: @context, @type, @id first, other keys sorted,
 * minimal separators — matches the bytes the server stores and serves. */
export function canonicalText(doc: AnnotationDoc): string {
  return JSON.stringify(canonicalNode(doc));
}

export function clearViolations(form: HTMLElement): void {
  form.classList.remove("has-error");
  for (const group of Array.from(form.querySelectorAll(".has-error"))) {
    group.classList.remove("has-error");
  }
  for (const note of Array.from(form.querySelectorAll(".violation"))) {
    note.remove();
  }
}

/** Attach server violations to their field groups by path. Indexed paths
 * (`description[2]`, `makesOffer[0].name`) collapse onto the unindexed
 * group; unmatched paths (e.g. `@type`) land on the form itself. */
export function applyViolations(form: HTMLElement, report: ValidationReport): number {
  clearViolations(form);
  let attached = 0;
  for (const violation of report.violations) {
    const path = violation.path.replace(/\[\d+\]/g, "");
    const group = Array.from(form.querySelectorAll<HTMLElement>(".field-group")).find(
      (el) => el.getAttribute("data-path") === path
    );
    const target = group ?? form;
    target.classList.add("has-error");
    const errors = Array.from(target.children).find((el) => el.classList.contains("field-errors"));
    const note = (errors ?? target).ownerDocument!.createElement("div");
    note.className = "violation";
    note.setAttribute("data-code", violation.code);
    note.textContent = `${violation.code}: ${violation.message}`;
    (errors ?? target).appendChild(note);
    if (group) attached += 1;
  }
  return attached;
}

/** Read-only notices for document properties the DS does not cover. */
export function renderUnknownNotices(container: HTMLElement, unknown: UnknownProperty[]): void {
  for (const entry of unknown) {
    const notice = container.ownerDocument!.createElement("div");
    notice.className = "unknown-property";
    notice.setAttribute("data-path", entry.path);
    const label = container.ownerDocument!.createElement("span");
    label.className = "unknown-label";
    label.textContent = `${entry.path} (UnknownProperty, read-only): `;
    const value = container.ownerDocument!.createElement("code");
    value.textContent = JSON.stringify(entry.value);
    notice.appendChild(label);
    notice.appendChild(value);
    container.appendChild(notice);
  }
}
