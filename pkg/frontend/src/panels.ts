/**
 * Filter and growth parameter forms.
 *
 * Each control maps to exactly one request field; values() reads the form
 * back into the request body. Option lists for the two multi-selects start
 * empty and grow from payload echoes (rendered node codes, pie-chart
 * phenotype names) plus whatever the analyst types in by hand; the UI never
 * invents codes of its own.
 */
import type { AugmentRequest, FilterRequest } from "./types";

function field(labelText: string, input: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  const span = document.createElement("span");
  span.textContent = labelText;
  label.append(span, input);
  return label;
}

function numberInput(name: string, value: number, opts: { min?: number; step?: number } = {}) {
  const input = document.createElement("input");
  input.type = "number";
  input.name = name;
  input.value = String(value);
  if (opts.min !== undefined) input.min = String(opts.min);
  if (opts.step !== undefined) input.step = String(opts.step);
  return input;
}

function slider(name: string, value: number, max: number) {
  const input = document.createElement("input");
  input.type = "range";
  input.name = name;
  input.min = "0";
  input.max = String(max);
  input.step = "0.01";
  input.value = String(value);
  const out = document.createElement("output");
  out.textContent = input.value;
  input.addEventListener("input", () => (out.textContent = input.value));
  return { input, out };
}

/** Multi-select plus a small "type a value, add it" row. */
function tokenSelect(name: string) {
  const select = document.createElement("select");
  select.multiple = true;
  select.name = name;
  select.size = 5;

  const entry = document.createElement("input");
  entry.type = "text";
  entry.placeholder = "add by name";
  const addBtn = document.createElement("button");
  addBtn.type = "button";
  addBtn.textContent = "add";

  const have = () => new Set(Array.from(select.options, (o) => o.value));
  const addOption = (value: string, selected: boolean) => {
    if (!value || have().has(value)) return;
    const opt = document.createElement("option");
    opt.value = value;
    opt.textContent = value;
    opt.selected = selected;
    select.appendChild(opt);
  };
  addBtn.addEventListener("click", () => {
    addOption(entry.value.trim(), true);
    entry.value = "";
  });

  const row = document.createElement("div");
  row.className = "token-entry";
  row.append(entry, addBtn);
  const wrap = document.createElement("div");
  wrap.className = "token-select";
  wrap.append(select, row);

  return {
    wrap,
    select,
    addOptions(values: string[]) {
      for (const v of values) addOption(v, false);
    },
    selected(): string[] {
      return Array.from(select.selectedOptions, (o) => o.value);
    },
  };
}

function panelShell(title: string, submitLabel: string) {
  const form = document.createElement("form");
  form.className = "panel";
  const h = document.createElement("h2");
  h.textContent = title;
  const fieldset = document.createElement("fieldset");
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = submitLabel;
  const error = document.createElement("p");
  error.className = "inline-error";
  error.hidden = true;
  form.append(h, fieldset, error);
  return { form, fieldset, submit, error };
}

export interface FilterPanel {
  root: HTMLFormElement;
  values(): FilterRequest;
  addCodeOptions(codes: string[]): void;
  addPhenotypeOptions(names: string[]): void;
  setBusy(busy: boolean): void;
  setError(message: string | null): void;
  onSubmit(handler: () => void): void;
}

export function filterPanel(): FilterPanel {
  const { form, fieldset, submit, error } = panelShell("filter", "apply filter");
  const codes = tokenSelect("codes");
  const phenotypes = tokenSelect("phenotypes");
  const minVisits = numberInput("min_visits", 0, { min: 0, step: 1 });
  const minPhen = numberInput("min_phenotype_count", 0, { min: 0, step: 1 });

  fieldset.append(
    field("seed codes", codes.wrap),
    field("phenotypes of interest", phenotypes.wrap),
    field("min visits per node", minVisits),
    field("min phenotype occurrences", minPhen),
    submit,
  );

  return {
    root: form,
    values: () => ({
      codes: codes.selected(),
      phenotypes: phenotypes.selected(),
      min_visits: Number(minVisits.value) || 0,
      min_phenotype_count: Number(minPhen.value) || 0,
    }),
    addCodeOptions: (cs) => codes.addOptions(cs),
    addPhenotypeOptions: (ns) => phenotypes.addOptions(ns),
    setBusy: (busy) => (fieldset.disabled = busy),
    setError(message) {
      error.hidden = message === null;
      error.textContent = message ?? "";
    },
    onSubmit(handler) {
      form.addEventListener("submit", (ev) => {
        ev.preventDefault();
        handler();
      });
    },
  };
}

export interface AugmentPanel {
  root: HTMLFormElement;
  values(): AugmentRequest;
  savePath(): string;
  setBusy(busy: boolean): void;
  setError(message: string | null): void;
  setStatus(message: string | null): void;
  setCohortSize(size: number | null): void;
  onSample(handler: () => void): void;
  onSave(handler: () => void): void;
  onReset(handler: () => void): void;
}

export function augmentPanel(): AugmentPanel {
  const { form, fieldset, submit, error } = panelShell("grow cohort", "sample");
  const hops = numberInput("hops", 2, { min: 1, step: 1 });
  const kl = slider("kl_threshold", 0.5, 2);
  const rate = slider("sampling_rate", 0.3, 1);
  const seed = numberInput("rng_seed", 0, { min: 0, step: 1 });
  const save = document.createElement("button");
  save.type = "button";
  save.name = "save";
  save.textContent = "save cohort";
  const reset = document.createElement("button");
  reset.type = "button";
  reset.name = "reset";
  reset.textContent = "reset";
  const savePath = document.createElement("input");
  savePath.type = "text";
  savePath.name = "save_path";
  savePath.value = "cohort.jsonl";

  const size = document.createElement("p");
  size.className = "cohort-size";
  size.textContent = "no cohort sampled yet";

  const status = document.createElement("p");
  status.className = "inline-status";
  status.hidden = true;

  const klField = field("KL gate", kl.input);
  klField.append(kl.out);
  const rateField = field("sampling rate", rate.input);
  rateField.append(rate.out);

  fieldset.append(
    field("hops", hops),
    klField,
    rateField,
    field("rng seed", seed),
    submit,
    field("save to", savePath),
    save,
    reset,
    size,
  );
  form.append(status);

  return {
    root: form,
    values: () => ({
      hops: Number(hops.value) || 0,
      kl_threshold: Number(kl.input.value),
      sampling_rate: Number(rate.input.value),
      rng_seed: Number(seed.value) || 0,
    }),
    savePath: () => savePath.value.trim(),
    setBusy: (busy) => (fieldset.disabled = busy),
    setError(message) {
      error.hidden = message === null;
      error.textContent = message ?? "";
    },
    setStatus(message) {
      status.hidden = message === null;
      status.textContent = message ?? "";
    },
    setCohortSize(sizeValue) {
      if (sizeValue === null) {
        delete size.dataset.size;
        size.textContent = "no cohort sampled yet";
      } else {
        size.dataset.size = String(sizeValue);
        size.textContent = `cohort: ${sizeValue} visits`;
      }
    },
    onSample(handler) {
      form.addEventListener("submit", (ev) => {
        ev.preventDefault();
        handler();
      });
    },
    onSave: (handler) => save.addEventListener("click", handler),
    onReset: (handler) => reset.addEventListener("click", handler),
  };
}
