// Screen renderers P1-P7. Each receives the wizard context and fills the
// content container; all numbers shown come from API responses.

import type { ApiClient, DeviceDoc } from './api';
import type { Store } from './state';
import { MAX_SELECTIONS, TECH_OPTIONS } from './state';
import { checkWord } from './validate';
import { cloudItems } from './wordcloud';

export interface WizardActions {
  grantConsent(granted: boolean): Promise<void>;
  submitSentiment(word: string): Promise<void>;
  castVote(selections: string[]): Promise<void>;
  selectDevice(deviceId: string): void;
  generateArtifact(): Promise<void>;
  verifyArtifact(): Promise<void>;
  refreshAggregates(): Promise<void>;
  run(task: () => Promise<void>): void;
}

export interface PageContext {
  doc: Document;
  api: ApiClient;
  store: Store;
  actions: WizardActions;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export async function renderP1(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'How machines compute with quantum states'));
  for (const paragraph of [
    'Superconducting circuits cooled close to absolute zero behave as artificial atoms: ' +
      'their energy levels are discrete, and the two lowest levels form a qubit. ' +
      'The Josephson junction supplies the nonlinearity that keeps those two levels addressable.',
    'Shaped microwave pulses drive transitions between the levels. Each pulse realizes a ' +
      'unitary operation, and sequences of such gate operations form programs. ' +
      'Trapped ions and neutral atoms reach the same model through lasers and optical traps.',
    'When a program ends, measurement collapses the state into ordinary bits whose ' +
      'statistics follow the squared amplitudes. That sampling behavior is what the rest of ' +
      'this demonstration builds on, all the way to a signed cryptographic artifact.',
  ]) {
    root.appendChild(el(doc, 'p', {}, paragraph));
  }
}

export async function renderP2(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc, api } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'What breaks, what bends, what holds'));
  root.appendChild(
    el(
      doc,
      'p',
      {},
      'A large fault-tolerant quantum computer would solve factoring and discrete ' +
        'logarithms outright, which breaks the signatures and key exchanges most systems ' +
        'deploy today. Search speedups only halve the effective strength of hashes and ' +
        'symmetric ciphers. The registry below ranks common primitives by that exposure.',
    ),
  );
  const table = el(doc, 'table', { id: 'vulnerability-table' });
  const head = el(doc, 'tr');
  for (const column of ['Primitive', 'Category', 'Classical bits', 'Attack', 'Quantum bits', 'Status']) {
    head.appendChild(el(doc, 'th', {}, column));
  }
  table.appendChild(head);
  const { primitives } = await api.vulnerability();
  for (const p of primitives) {
    const row = el(doc, 'tr', { class: `status-${p.status.toLowerCase()}` });
    row.appendChild(el(doc, 'td', {}, p.name));
    row.appendChild(el(doc, 'td', {}, p.category));
    row.appendChild(el(doc, 'td', {}, String(p.classical_bits)));
    row.appendChild(el(doc, 'td', {}, p.quantum_attack));
    row.appendChild(el(doc, 'td', {}, String(p.quantum_bits)));
    row.appendChild(el(doc, 'td', { class: 'status-cell' }, p.status));
    table.appendChild(row);
  }
  root.appendChild(table);
}

export async function renderP3(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc, store, actions } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'Taking part'));
  root.appendChild(
    el(
      doc,
      'p',
      {},
      'The next screens collect a one-word impression and a vote. Participation is ' +
        'voluntary and anonymous; responses are aggregated for research. You can decline ' +
        'and still review everything you have seen so far.',
    ),
  );
  const status = el(doc, 'p', { id: 'consent-status' },
    store.get().consent ? 'Consent recorded.' : 'Consent not yet given.');
  const agree = el(doc, 'button', { id: 'btn-consent-yes' }, 'I agree to participate');
  const decline = el(doc, 'button', { id: 'btn-consent-no' }, 'Decline');
  agree.addEventListener('click', () => actions.run(() => actions.grantConsent(true)));
  decline.addEventListener('click', () => actions.run(() => actions.grantConsent(false)));
  root.append(agree, decline, status);
}

export async function renderP4(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc, store, actions } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'One word'));
  root.appendChild(el(doc, 'p', {}, 'Which single word do you associate with quantum computing?'));
  const input = el(doc, 'input', { id: 'sentiment-input', type: 'text', maxlength: '64' });
  const feedback = el(doc, 'span', { id: 'sentiment-feedback' }, '');
  const submit = el(doc, 'button', { id: 'btn-sentiment' }, 'Submit');
  const echo = el(doc, 'p', { id: 'sentiment-echo' },
    store.get().sentimentWord ? `Recorded: ${store.get().sentimentWord}` : '');

  const validate = () => {
    const verdict = checkWord(input.value);
    feedback.textContent = verdict.ok ? '' : verdict.reason ?? '';
    submit.disabled = !verdict.ok || store.get().sentimentWord !== null;
    return verdict;
  };
  input.addEventListener('input', validate);
  submit.addEventListener('click', () => {
    const verdict = validate();
    if (verdict.ok) actions.run(() => actions.submitSentiment(input.value));
  });
  if (store.get().sentimentWord !== null) {
    input.setAttribute('disabled', 'disabled');
    submit.disabled = true;
  }
  root.append(input, submit, feedback, echo);
}

export async function renderP5(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc, store, actions } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'What the room thinks, and what to build first'));
  root.appendChild(el(doc, 'div', { id: 'word-cloud', class: 'word-cloud' }));

  const form = el(doc, 'div', { id: 'vote-form' });
  form.appendChild(el(doc, 'p', {}, `Pick up to ${MAX_SELECTIONS} technologies to prioritize:`));
  const boxes: HTMLInputElement[] = [];
  for (const option of TECH_OPTIONS) {
    const label = el(doc, 'label', { class: 'vote-option' });
    const box = el(doc, 'input', { type: 'checkbox', value: option, id: `vote-${option}` });
    if (store.get().ballot?.includes(option)) box.checked = true;
    box.addEventListener('change', () => {
      const picked = boxes.filter((b) => b.checked);
      if (picked.length > MAX_SELECTIONS) box.checked = false;
      voteButton.disabled = picked.length === 0 || picked.length > MAX_SELECTIONS;
    });
    boxes.push(box);
    label.append(box, doc.createTextNode(` ${option}`));
    form.appendChild(label);
  }
  const voteButton = el(doc, 'button', { id: 'btn-vote' }, 'Cast vote');
  voteButton.disabled = !store.get().ballot;
  voteButton.addEventListener('click', () => {
    const selections = boxes.filter((b) => b.checked).map((b) => b.value);
    if (selections.length >= 1 && selections.length <= MAX_SELECTIONS) {
      actions.run(() => actions.castVote(selections));
    }
  });
  form.appendChild(voteButton);
  root.appendChild(form);
  root.appendChild(el(doc, 'div', { id: 'tally-bars' }));
  await actions.refreshAggregates();
}

export function paintAggregates(
  doc: Document,
  cloudRoot: HTMLElement,
  tallyRoot: HTMLElement,
  aggregate: { top_k: { word: string; count: number }[] },
  tally: { counts: Record<string, number>; total_ballots: number },
): void {
  cloudRoot.textContent = '';
  for (const item of cloudItems(aggregate.top_k)) {
    const span = el(doc, 'span', { class: 'cloud-word' }, item.word);
    span.style.fontSize = `${item.fontPx.toFixed(1)}px`;
    span.title = `${item.count}`;
    cloudRoot.appendChild(span);
    cloudRoot.appendChild(doc.createTextNode(' '));
  }
  tallyRoot.textContent = '';
  const total = Math.max(tally.total_ballots, 1);
  for (const option of TECH_OPTIONS) {
    const count = tally.counts[option] ?? 0;
    const row = el(doc, 'div', { class: 'tally-row', 'data-option': option });
    row.appendChild(el(doc, 'span', { class: 'tally-label' }, `${option}: ${count}`));
    const bar = el(doc, 'div', { class: 'tally-bar' });
    bar.style.width = `${(100 * count) / total}%`;
    row.appendChild(bar);
    tallyRoot.appendChild(row);
  }
}

const SORTABLE_METRICS = ['max_qubits', 'gate_error', 'latency_ms', 'power_kw', 'carbon_g'] as const;

export async function renderP6(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc, api, store, actions } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'Choose an execution environment'));

  const regionRow = el(doc, 'div', { class: 'region-row' });
  regionRow.appendChild(el(doc, 'span', {}, 'Grid region: '));
  const regionSelect = el(doc, 'select', { id: 'region-select' });
  for (const code of ['global-avg', 'eu-north', 'eu-central', 'us-east', 'us-west', 'ap-south']) {
    regionSelect.appendChild(el(doc, 'option', { value: code }, code));
  }
  regionRow.appendChild(regionSelect);
  const sortRow = el(doc, 'div', { class: 'sort-row' });
  sortRow.appendChild(el(doc, 'span', {}, 'Sort by: '));
  root.append(regionRow, sortRow);
  const cards = el(doc, 'div', { id: 'device-cards' });
  root.appendChild(cards);

  let devices: DeviceDoc[] = [];
  let sortKey: (typeof SORTABLE_METRICS)[number] = 'carbon_g';

  const metricValue = (d: DeviceDoc, key: typeof sortKey): number =>
    key === 'carbon_g' ? d.impact.carbon_g : d[key];

  const paint = () => {
    const ranked = [...devices].sort((a, b) => {
      const sign = sortKey === 'max_qubits' ? -1 : 1;
      return sign * (metricValue(a, sortKey) - metricValue(b, sortKey)) || a.id.localeCompare(b.id);
    });
    cards.textContent = '';
    for (const device of ranked) {
      const card = el(doc, 'div', {
        class: `device-card${store.get().selectedDevice === device.id ? ' selected' : ''}${device.available ? '' : ' off'}`,
        'data-device-id': device.id,
        'data-architecture': device.architecture,
      });
      card.appendChild(el(doc, 'h3', {}, device.display_name));
      const rows: [string, string][] = [
        ['architecture', device.architecture],
        ['qubits', String(device.max_qubits)],
        ['gate error', device.gate_error.toExponential(1)],
        ['readout error', device.readout_error.toExponential(1)],
        ['latency', `${device.latency_ms} ms`],
        ['power', `${device.power_kw} kW`],
        ['carbon / run', `${device.impact.carbon_g.toFixed(3)} g (${device.impact.region_code})`],
        ['entropy', device.entropy_class],
      ];
      const list = el(doc, 'dl');
      for (const [term, value] of rows) {
        list.appendChild(el(doc, 'dt', {}, term));
        list.appendChild(el(doc, 'dd', {}, value));
      }
      card.appendChild(list);
      if (device.available) {
        card.addEventListener('click', () => {
          actions.selectDevice(device.id);
          paint();
        });
      }
      cards.appendChild(card);
    }
  };

  for (const metric of SORTABLE_METRICS) {
    const button = el(doc, 'button', { class: 'sort-btn', 'data-sort': metric }, metric);
    button.addEventListener('click', () => {
      sortKey = metric;
      paint();
    });
    sortRow.appendChild(button);
  }
  regionSelect.addEventListener('change', () => {
    actions.run(async () => {
      devices = (await api.listDevices(regionSelect.value)).devices;
      paint();
    });
  });

  devices = (await api.listDevices(regionSelect.value)).devices;
  paint();
}

export async function renderP7(root: HTMLElement, ctx: PageContext): Promise<void> {
  const { doc, store, actions } = ctx;
  root.appendChild(el(doc, 'h2', {}, 'Your signed artifact'));
  const device = store.get().selectedDevice;
  root.appendChild(
    el(doc, 'p', {}, device ? `Selected device: ${device}` : 'No device selected; go back to P6.'),
  );
  const generate = el(doc, 'button', { id: 'btn-generate' }, 'Run and sign');
  generate.disabled = !device;
  generate.addEventListener('click', () => actions.run(() => actions.generateArtifact()));
  root.appendChild(generate);
  root.appendChild(el(doc, 'div', { id: 'artifact-panel' }));
  paintArtifact(doc, root.querySelector('#artifact-panel')!, ctx);
}

export function paintArtifact(doc: Document, panel: HTMLElement, ctx: PageContext): void {
  const { store, actions } = ctx;
  const state = store.get();
  panel.textContent = '';
  if (state.execution) {
    const execution = state.execution;
    const block = el(doc, 'div', { class: 'execution-block' });
    block.appendChild(el(doc, 'h3', {}, `Execution ${execution.status}`));
    const list = el(doc, 'dl');
    for (const [term, value] of [
      ['execution id', execution.execution_id],
      ['device', execution.device_id],
      ['shots', String(execution.shots)],
      ['seed', String(execution.seed)],
      ['digest', execution.provenance_digest.slice(0, 24) + '…'],
    ]) {
      list.appendChild(el(doc, 'dt', {}, term));
      list.appendChild(el(doc, 'dd', {}, value));
    }
    block.appendChild(list);
    panel.appendChild(block);
  }
  if (!state.artifact) return;
  const artifact = state.artifact;
  const block = el(doc, 'div', { class: 'artifact-block' });
  block.appendChild(el(doc, 'h3', {}, 'Post-quantum artifact'));
  const badge = el(
    doc,
    'span',
    { id: 'entropy-badge', class: `badge badge-${artifact.metadata.entropy_class}` },
    artifact.metadata.entropy_class,
  );
  block.appendChild(badge);
  const list = el(doc, 'dl');
  for (const [term, value] of [
    ['quantum id', artifact.quantum_id],
    ['public root', artifact.public_root],
    ['signature', `leaf ${artifact.signature.leaf_index}, ` +
      `${artifact.signature.reveals.length} reveals, ` +
      `${artifact.signature.reveals[0].slice(0, 16)}…`],
    ['message', artifact.message],
    ['backend', artifact.metadata.backend],
    ['device', artifact.metadata.device_id],
    ['status', artifact.metadata.status],
    ['created', artifact.metadata.created_at],
  ]) {
    list.appendChild(el(doc, 'dt', {}, term));
    list.appendChild(el(doc, 'dd', {}, value));
  }
  block.appendChild(list);
  const verify = el(doc, 'button', { id: 'btn-verify' }, 'Verify');
  verify.addEventListener('click', () => actions.run(() => actions.verifyArtifact()));
  block.appendChild(verify);
  block.appendChild(el(doc, 'span', { id: 'verify-result' }, ''));
  panel.appendChild(block);
}
