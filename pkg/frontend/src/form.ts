/** Schema-driven form rendering.
 *
 * One `.field-group` per form field, each carrying its dotted document path
 * in `data-path` so server violation paths map straight onto the DOM.
 * Fields with multiplicity "many" get row add/remove controls; nested types
 * render as fieldset subforms (rows of nested field groups).
 *
 * Optional checkboxes contribute a value only while checked (an unchecked
 * optional boolean means "not asserted"); required checkboxes always emit.
 */

import type { FormFieldJson, FormSchemaJson, ScalarValue } from "./api";

export type FieldValue = ScalarValue | FormValues;

export interface FormValues {
  [property: string]: FieldValue | FieldValue[];
}

const INPUT_TYPE: Record<string, string> = {
  text: "text",
  url: "url",
  number: "number",
  checkbox: "checkbox",
  date: "date",
  datetime: "datetime-local",
};

export function renderForm(schema: FormSchemaJson, doc: Document = document): HTMLFormElement {
  const form = doc.createElement("form");
  form.className = "annotation-form";
  form.setAttribute("data-root-label", schema.rootLabel);
  for (const field of schema.fields) {
    form.appendChild(renderField(field, field.propertyToken, doc));
  }
  return form;
}

function renderField(field: FormFieldJson, path: string, doc: Document): HTMLElement {
  const group = doc.createElement(field.widget === "subform" ? "fieldset" : "div");
  group.className = field.widget === "subform" ? "field-group subform" : "field-group";
  group.setAttribute("data-path", path);
  group.setAttribute("data-widget", field.widget);
  group.setAttribute("data-required", String(field.required));
  group.setAttribute("data-multiplicity", field.multiplicity);
  if (field.rangeOptions) group.setAttribute("data-range-options", field.rangeOptions.join(","));

  const caption = doc.createElement(field.widget === "subform" ? "legend" : "label");
  caption.className = "field-label";
  caption.textContent = field.label;
  if (field.widget === "subform" && field.subform) {
    const typeNote = doc.createElement("span");
    typeNote.className = "subform-type";
    typeNote.textContent = ` (${field.subform.rootLabel})`;
    caption.appendChild(typeNote);
  }
  if (field.required) {
    const marker = doc.createElement("span");
    marker.className = "required-marker";
    marker.textContent = " *";
    caption.appendChild(marker);
  }
  group.appendChild(caption);

  const rows = doc.createElement("div");
  rows.className = "rows";
  group.appendChild(rows);
  rows.appendChild(makeRow(field, path, doc));

  if (field.multiplicity === "many") {
    const add = doc.createElement("button");
    add.type = "button";
    add.className = "add-row";
    add.textContent = "+";
    add.onclick = () => {
      rows.appendChild(makeRow(field, path, doc));
    };
    group.appendChild(add);
  }

  const errors = doc.createElement("div");
  errors.className = "field-errors";
  group.appendChild(errors);
  return group;
}

function makeRow(field: FormFieldJson, path: string, doc: Document): HTMLElement {
  const row = doc.createElement("div");
  row.className = "row";
  if (field.widget === "subform" && field.subform) {
    const nested = doc.createElement("div");
    nested.className = "subform-fields";
    for (const inner of field.subform.fields) {
      nested.appendChild(renderField(inner, `${path}.${inner.propertyToken}`, doc));
    }
    row.appendChild(nested);
  } else {
    const input = doc.createElement("input");
    input.className = "field-input";
    input.type = INPUT_TYPE[field.widget] ?? "text";
    if (field.widget === "number") input.step = "any";
    row.appendChild(input);
  }
  if (field.multiplicity === "many") {
    const remove = doc.createElement("button");
    remove.type = "button";
    remove.className = "remove-row";
    remove.textContent = "−";
    remove.onclick = () => {
      const rows = row.parentElement;
      if (rows && rows.children.length > 1) row.remove();
    };
    row.appendChild(remove);
  }
  return row;
}

export function addRow(group: HTMLElement): void {
  const add = group.querySelector<HTMLButtonElement>(":scope > .add-row");
  if (add) add.click();
}

/** The field groups directly owned by a form or a subform row, in schema order. */
function ownGroups(container: Element): HTMLElement[] {
  return Array.from(container.children).filter((el): el is HTMLElement =>
    el.classList.contains("field-group")
  );
}

function ownRows(group: Element): HTMLElement[] {
  const rows = Array.from(group.children).find((el) => el.classList.contains("rows"));
  return rows ? (Array.from(rows.children) as HTMLElement[]) : [];
}

function scalarFromInput(field: FormFieldJson, input: HTMLInputElement): ScalarValue | undefined {
  if (field.widget === "checkbox") {
    if (!field.required && !input.checked) return undefined;
    return input.checked;
  }
  const raw = input.value.trim();
  if (raw === "") return undefined;
  if (field.widget === "number") {
    const parsed = Number(raw);
    return Number.isFinite(parsed) ? parsed : raw;
  }
  if (field.widget === "datetime" && raw.length === 16) return `${raw}:00`;
  return raw;
}

function collectField(field: FormFieldJson, group: HTMLElement): FieldValue | FieldValue[] | undefined {
  const values: FieldValue[] = [];
  for (const row of ownRows(group)) {
    if (field.widget === "subform" && field.subform) {
      const nested = row.querySelector<HTMLElement>(":scope > .subform-fields");
      if (!nested) continue;
      const inner = collectInto(field.subform, nested);
      if (Object.keys(inner).length > 0) values.push(inner);
    } else {
      const input = row.querySelector<HTMLInputElement>(":scope > .field-input");
      if (!input) continue;
      const value = scalarFromInput(field, input);
      if (value !== undefined) values.push(value);
    }
  }
  if (values.length === 0) return undefined;
  return field.multiplicity === "many" ? values : values[0];
}

function collectInto(schema: FormSchemaJson, container: Element): FormValues {
  const out: FormValues = {};
  const groups = ownGroups(container);
  schema.fields.forEach((field, index) => {
    const group = groups[index];
    if (!group) return;
    const value = collectField(field, group);
    if (value !== undefined) out[field.propertyToken] = value;
  });
  return out;
}

export function collectValues(form: HTMLFormElement, schema: FormSchemaJson): FormValues {
  return collectInto(schema, form);
}

function fillScalar(field: FormFieldJson, input: HTMLInputElement, value: ScalarValue): void {
  if (field.widget === "checkbox") {
    input.checked = value === true;
  } else if (field.widget === "datetime" && typeof value === "string") {
    input.value = value.slice(0, 16);
  } else {
    input.value = String(value);
  }
}

function populateField(field: FormFieldJson, group: HTMLElement, value: FieldValue | FieldValue[], doc: Document): void {
  const items = Array.isArray(value) ? value : [value];
  const rowsEl = Array.from(group.children).find((el) => el.classList.contains("rows"));
  if (!rowsEl) return;
  while (rowsEl.children.length < items.length) rowsEl.appendChild(makeRow(field, group.getAttribute("data-path") ?? "", doc));
  while (rowsEl.children.length > Math.max(items.length, 1)) rowsEl.lastElementChild?.remove();
  (Array.from(rowsEl.children) as HTMLElement[]).forEach((row, index) => {
    const item = items[index];
    if (item === undefined) return;
    if (field.widget === "subform" && field.subform) {
      const nested = row.querySelector<HTMLElement>(":scope > .subform-fields");
      if (nested && typeof item === "object" && !Array.isArray(item)) {
        populateInto(field.subform, nested, item as FormValues, doc);
      }
    } else {
      const input = row.querySelector<HTMLInputElement>(":scope > .field-input");
      if (input) fillScalar(field, input, item as ScalarValue);
    }
  });
}

function populateInto(schema: FormSchemaJson, container: Element, values: FormValues, doc: Document): void {
  const groups = ownGroups(container);
  schema.fields.forEach((field, index) => {
    const group = groups[index];
    const value = values[field.propertyToken];
    if (group && value !== undefined) populateField(field, group, value, doc);
  });
}

export function populateForm(
  form: HTMLFormElement,
  schema: FormSchemaJson,
  values: FormValues,
  doc: Document = document
): void {
  populateInto(schema, form, values, doc);
}

/** Total rendered input groups, nested ones included (subform groups count 1 each). */
export function countFieldGroups(form: HTMLFormElement): number {
  return form.querySelectorAll(".field-group").length;
}
