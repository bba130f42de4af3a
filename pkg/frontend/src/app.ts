// Wizard shell: navigation, server synchronization, and page composition.
// The store mirrors the server session; gating here prevents requests the
// gateway would reject in a clean flow, while the server stays authoritative.

import { ApiClient, ApiError } from './api';
import {
  paintAggregates,
  paintArtifact,
  renderP1,
  renderP2,
  renderP3,
  renderP4,
  renderP5,
  renderP6,
  renderP7,
  type PageContext,
  type WizardActions,
} from './pages';
import { canAdvance, canGoBack, nextPage, previousPage, Store, type PageLabel } from './state';

const RENDERERS: Record<PageLabel, (root: HTMLElement, ctx: PageContext) => Promise<void>> = {
  P1: renderP1,
  P2: renderP2,
  P3: renderP3,
  P4: renderP4,
  P5: renderP5,
  P6: renderP6,
  P7: renderP7,
};

const TITLES: Record<PageLabel, string> = {
  P1: 'Quantum foundations',
  P2: 'Threat model',
  P3: 'Consent',
  P4: 'Sentiment',
  P5: 'Aggregate and vote',
  P6: 'Device selection',
  P7: 'Artifact',
};

export interface WizardOptions {
  pollMs?: number; // 0 disables the P5 polling timer
}

export class Wizard {
  readonly store = new Store();
  private doc: Document;
  private content!: HTMLElement;
  private status!: HTMLElement;
  private backButton!: HTMLButtonElement;
  private nextButton!: HTMLButtonElement;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private pollMs: number;
  private queue: Promise<void> = Promise.resolve();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    options: WizardOptions = {},
  ) {
    this.doc = root.ownerDocument;
    this.pollMs = options.pollMs ?? 3000;
  }

  // serialize UI-triggered async work so tests can await idle()
  run(task: () => Promise<void>): void {
    this.queue = this.queue.then(task).catch((error) => this.showError(error));
  }

  idle(): Promise<void> {
    return this.queue;
  }

  async start(): Promise<void> {
    this.buildShell();
    this.store.applySession(await this.api.createSession());
    await this.render();
  }

  private buildShell(): void {
    this.root.textContent = '';
    const header = this.doc.createElement('header');
    const title = this.doc.createElement('h1');
    title.id = 'wizard-title';
    header.appendChild(title);
    const steps = this.doc.createElement('nav');
    steps.id = 'wizard-steps';
    header.appendChild(steps);

    this.content = this.doc.createElement('section');
    this.content.id = 'wizard-content';

    const footer = this.doc.createElement('footer');
    this.backButton = this.doc.createElement('button');
    this.backButton.id = 'btn-back';
    this.backButton.textContent = 'Back';
    this.backButton.addEventListener('click', () => this.run(() => this.back()));
    this.nextButton = this.doc.createElement('button');
    this.nextButton.id = 'btn-next';
    this.nextButton.textContent = 'Next';
    this.nextButton.addEventListener('click', () => this.run(() => this.next()));
    this.status = this.doc.createElement('div');
    this.status.id = 'wizard-status';
    footer.append(this.backButton, this.nextButton, this.status);

    this.root.append(header, this.content, footer);
  }

  async next(): Promise<void> {
    const state = this.store.get();
    if (!state.sessionId || !canAdvance(state)) return;
    if (state.page === 'P6' && !state.selectedDevice) {
      this.status.textContent = 'Select a device first.';
      return;
    }
    this.store.applySession(await this.api.advancePage(state.sessionId, nextPage(state)));
    await this.render();
  }

  async back(): Promise<void> {
    const state = this.store.get();
    if (!state.sessionId || !canGoBack(state)) return;
    this.store.applySession(await this.api.advancePage(state.sessionId, previousPage(state)));
    await this.render();
  }

  private context(): PageContext {
    const actions: WizardActions = {
      grantConsent: async (granted) => {
        const state = this.store.get();
        this.store.applySession(await this.api.recordConsent(state.sessionId!, granted));
        await this.render();
      },
      submitSentiment: async (word) => {
        const state = this.store.get();
        this.store.applySession(await this.api.submitSentiment(state.sessionId!, word));
        await this.render();
      },
      castVote: async (selections) => {
        const state = this.store.get();
        this.store.applySession(await this.api.castVote(state.sessionId!, selections));
        await actions.refreshAggregates();
        this.status.textContent = 'Vote recorded.';
      },
      selectDevice: (deviceId) => {
        this.store.set({ selectedDevice: deviceId });
        this.status.textContent = `Device ${deviceId} selected.`;
      },
      generateArtifact: async () => {
        const state = this.store.get();
        const execution = await this.api.execute(state.sessionId!, state.selectedDevice!);
        this.store.set({ execution });
        const artifact = await this.api.generateArtifact(state.sessionId!, execution.execution_id);
        this.store.set({ artifact });
        const panel = this.doc.getElementById('artifact-panel');
        if (panel) paintArtifact(this.doc, panel, this.context());
      },
      verifyArtifact: async () => {
        const artifact = this.store.get().artifact;
        if (!artifact) return;
        const verdict = await this.api.verifyArtifact(artifact.artifact_id);
        const slot = this.doc.getElementById('verify-result');
        if (slot) slot.textContent = verdict.valid ? 'valid' : 'INVALID';
      },
      refreshAggregates: async () => {
        const cloud = this.doc.getElementById('word-cloud');
        const bars = this.doc.getElementById('tally-bars');
        if (!cloud || !bars) return;
        const [aggregate, tally] = await Promise.all([
          this.api.sentimentAggregate(25),
          this.api.votesTally(),
        ]);
        paintAggregates(this.doc, cloud, bars, aggregate, tally);
      },
      run: (task) => this.run(task),
    };
    return { doc: this.doc, api: this.api, store: this.store, actions };
  }

  async render(): Promise<void> {
    const state = this.store.get();
    const title = this.doc.getElementById('wizard-title');
    if (title) title.textContent = `${state.page} — ${TITLES[state.page]}`;
    const steps = this.doc.getElementById('wizard-steps');
    if (steps) {
      steps.textContent = '';
      for (let page = 1; page <= 7; page += 1) {
        const dot = this.doc.createElement('span');
        dot.className = `step${state.page === `P${page}` ? ' active' : ''}`;
        dot.textContent = `P${page}`;
        steps.appendChild(dot);
      }
    }
    this.status.textContent = '';
    this.content.textContent = '';
    this.stopPolling();
    await RENDERERS[state.page](this.content, this.context());
    if (state.page === 'P5' && this.pollMs > 0) this.startPolling();
    this.backButton.disabled = !canGoBack(state);
    this.nextButton.disabled = !canAdvance(state);
  }

  private startPolling(): void {
    const { actions } = this.context();
    this.pollTimer = setInterval(() => this.run(() => actions.refreshAggregates()), this.pollMs);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private showError(error: unknown): void {
    const message =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    if (this.status) this.status.textContent = message;
  }
}
