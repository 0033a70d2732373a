// The type-entry form is derived from the mechanism: a single bid, a
// per-item valuation vector, an interval plus its value, or a project
// willingness-to-pay. Client-side validation mirrors the gateway rules;
// the gateway stays authoritative.

export interface Field {
  name: string;
  label: string;
  kind: "amount" | "item-index";
}

export interface FormSchema {
  mechanismId: string;
  title: string;
  fields: Field[];
  toTypeValue(values: Record<string, string>): unknown;
}

const AMOUNT = /^-?\d+(\/\d+)?$/;

function parseAmount(raw: string, label: string): string {
  const text = raw.trim();
  if (!AMOUNT.test(text)) {
    throw new Error(`${label}: enter an amount like 10 or 7/2`);
  }
  if (text.startsWith("-")) {
    throw new Error(`${label}: amounts must not be negative`);
  }
  return text.includes("/") ? text : `${text}/1`;
}

function parseIndex(raw: string, label: string, items: number): number {
  const value = Number(raw.trim());
  if (!Number.isInteger(value) || value < 1 || value > items) {
    throw new Error(`${label}: item index must be between 1 and ${items}`);
  }
  return value;
}

export function formSchema(
  mechanismId: string,
  params: Record<string, unknown>,
): FormSchema {
  if (mechanismId === "unit-demand") {
    const items = Number(params["items"] ?? 0);
    const fields: Field[] = [];
    for (let j = 1; j <= items; j++) {
      fields.push({ name: `item${j}`, label: `Valuation for item ${j}`, kind: "amount" });
    }
    return {
      mechanismId,
      title: `Your valuation for each of the ${items} items`,
      fields,
      toTypeValue: (values) =>
        fields.map((f) => parseAmount(values[f.name] ?? "", f.label)),
    };
  }
  if (mechanismId === "single-minded") {
    const items = Number(params["items"] ?? 0);
    return {
      mechanismId,
      title: `The block of items (1..${items}) you want, and your value for it`,
      fields: [
        { name: "first", label: "First item", kind: "item-index" },
        { name: "last", label: "Last item", kind: "item-index" },
        { name: "value", label: "Value for the whole block", kind: "amount" },
      ],
      toTypeValue: (values) => {
        const a = parseIndex(values["first"] ?? "", "First item", items);
        const b = parseIndex(values["last"] ?? "", "Last item", items);
        if (a > b) {
          throw new Error("First item must not exceed last item");
        }
        return [a, b, parseAmount(values["value"] ?? "", "Value")];
      },
    };
  }
  if (mechanismId === "public-project") {
    return {
      mechanismId,
      title: "What the project is worth to you",
      fields: [{ name: "value", label: "Willingness to pay", kind: "amount" }],
      toTypeValue: (values) => parseAmount(values["value"] ?? "", "Willingness to pay"),
    };
  }
  // vickrey, vickrey-cavallo, first-price: one sealed bid
  return {
    mechanismId,
    title: "Your sealed bid",
    fields: [{ name: "bid", label: "Bid", kind: "amount" }],
    toTypeValue: (values) => parseAmount(values["bid"] ?? "", "Bid"),
  };
}
