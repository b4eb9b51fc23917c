/** Domain-specification builder.
 *
 * `dsFromSelections` is the pure core: vocabulary-driven picks in, DS JSON
 * out, ready for `saveDs`. The DOM layer is a thin class picker plus one
 * checkbox row per vocabulary property; nested range tokens become empty
 * nested types (their own constraints are edited as a separate DS pass).
 */

import type { ApiClient, ConstraintJson, DsJson, RangeJson } from "./api";

export const PRIMITIVE_KINDS = new Set([
  "Text",
  "Number",
  "Integer",
  "Float",
  "Boolean",
  "Date",
  "DateTime",
  "Time",
  "URL",
]);

export interface NestedSelection {
  type: string;
  selections: PropertySelection[];
}

export interface PropertySelection {
  property: string;
  required: boolean;
  multiplicity: "single" | "many";
  /** Vocabulary range tokens to allow; primitives map to primitive ranges,
   * class tokens to nested types (optionally with their own selections). */
  ranges: Array<string | NestedSelection>;
}

function rangeFromToken(token: string | NestedSelection): RangeJson {
  if (typeof token !== "string") {
    return {
      kind: "nestedType",
      nestedType: { type: token.type, constraints: token.selections.map(constraintFromSelection) },
    };
  }
  if (PRIMITIVE_KINDS.has(token)) {
    return { kind: "primitive", primitive: token };
  }
  return { kind: "nestedType", nestedType: { type: token, constraints: [] } };
}

function constraintFromSelection(selection: PropertySelection): ConstraintJson {
  if (selection.ranges.length === 0) {
    throw new Error(`${selection.property}: at least one range is required`);
  }
  return {
    property: selection.property,
    required: selection.required,
    multiplicity: selection.multiplicity,
    ranges: selection.ranges.map(rangeFromToken),
  };
}

/** Build the DS JSON for `saveDs`. `dsId: null` lets the server mint one. */
export function dsFromSelections(
  name: string,
  targetType: string,
  selections: PropertySelection[],
  dsId: string | null = null
): DsJson {
  if (name.trim() === "") throw new Error("DS name must be nonempty");
  if (targetType.trim() === "") throw new Error("target type must be nonempty");
  return {
    dsId,
    name,
    targetType,
    version: 0,
    constraints: selections.map(constraintFromSelection),
  };
}

export interface DsBuilderHandle {
  /** Currently checked properties as selections (first range pre-picked). */
  currentSelections(): PropertySelection[];
  currentTargetType(): string;
}

/** Minimal builder UI: target-class select, then a property checklist with
 * required/many toggles and a range select per property. */
export async function renderDsBuilder(
  container: HTMLElement,
  client: ApiClient,
  onSave: (ds: DsJson) => void
): Promise<DsBuilderHandle> {
  const doc = container.ownerDocument!;
  container.textContent = "";
  const root = doc.createElement("div");
  root.className = "ds-builder";

  const nameInput = doc.createElement("input");
  nameInput.type = "text";
  nameInput.className = "ds-name-input";
  nameInput.placeholder = "Specification name";
  root.appendChild(nameInput);

  const classSelect = doc.createElement("select");
  classSelect.className = "ds-class-select";
  const classes = await client.vocabularyClasses();
  for (const cls of classes) {
    const option = doc.createElement("option");
    option.value = cls.name;
    option.textContent = cls.name;
    classSelect.appendChild(option);
  }
  root.appendChild(classSelect);

  const propertyList = doc.createElement("div");
  propertyList.className = "ds-property-list";
  root.appendChild(propertyList);

  async function loadProperties(): Promise<void> {
    propertyList.textContent = "";
    const properties = await client.classProperties(classSelect.value);
    for (const property of properties) {
      const row = doc.createElement("div");
      row.className = "ds-property-row";
      row.setAttribute("data-property", property.name);

      const include = doc.createElement("input");
      include.type = "checkbox";
      include.className = "ds-include";
      row.appendChild(include);

      const label = doc.createElement("span");
      label.className = "ds-property-name";
      label.textContent = property.name;
      label.title = property.description;
      row.appendChild(label);

      const required = doc.createElement("input");
      required.type = "checkbox";
      required.className = "ds-required";
      row.appendChild(required);

      const many = doc.createElement("input");
      many.type = "checkbox";
      many.className = "ds-many";
      row.appendChild(many);

      const rangeSelect = doc.createElement("select");
      rangeSelect.className = "ds-range-select";
      for (const range of property.ranges) {
        const option = doc.createElement("option");
        option.value = range;
        option.textContent = range;
        rangeSelect.appendChild(option);
      }
      row.appendChild(rangeSelect);

      propertyList.appendChild(row);
    }
  }

  classSelect.addEventListener("change", () => void loadProperties());
  await loadProperties();

  function currentSelections(): PropertySelection[] {
    const selections: PropertySelection[] = [];
    for (const row of Array.from(propertyList.querySelectorAll<HTMLElement>(".ds-property-row"))) {
      const include = row.querySelector<HTMLInputElement>(".ds-include")!;
      if (!include.checked) continue;
      selections.push({
        property: row.getAttribute("data-property")!,
        required: row.querySelector<HTMLInputElement>(".ds-required")!.checked,
        multiplicity: row.querySelector<HTMLInputElement>(".ds-many")!.checked ? "many" : "single",
        ranges: [row.querySelector<HTMLSelectElement>(".ds-range-select")!.value],
      });
    }
    return selections;
  }

  const saveButton = doc.createElement("button");
  saveButton.type = "button";
  saveButton.className = "ds-save-button";
  saveButton.textContent = "Save specification";
  saveButton.addEventListener("click", () => {
    const ds = dsFromSelections(nameInput.value, classSelect.value, currentSelections());
    onSave(ds);
  });
  root.appendChild(saveButton);

  container.appendChild(root);
  return { currentSelections, currentTargetType: () => classSelect.value };
}
