// Wizard state store mirroring the server session so the UI never issues a
// request the gateway would gate-reject in a clean flow.

import type { ArtifactDoc, ExecutionDoc, SessionDoc } from './api';

export const PAGES = ['P1', 'P2', 'P3', 'P4', 'P5', 'P6', 'P7'] as const;
export type PageLabel = (typeof PAGES)[number];

export const TECH_OPTIONS = [
  'PostQuantumSignatures',
  'QuantumKeyDistribution',
  'HashBasedCryptography',
  'QuantumRandomNumberGeneration',
  'QuantumSafeSmartContracts',
  'ZeroKnowledgeProofs',
] as const;
export type TechOption = (typeof TECH_OPTIONS)[number];

export const MAX_SELECTIONS = 3;

export interface WizardState {
  sessionId: string | null;
  page: PageLabel;
  consent: boolean;
  sentimentWord: string | null;
  ballot: string[] | null;
  selectedDevice: string | null;
  execution: ExecutionDoc | null;
  artifact: ArtifactDoc | null;
}

export function initialState(): WizardState {
  return {
    sessionId: null,
    page: 'P1',
    consent: false,
    sentimentWord: null,
    ballot: null,
    selectedDevice: null,
    execution: null,
    artifact: null,
  };
}

export function pageNumber(page: PageLabel): number {
  return Number(page.slice(1));
}

export function canAdvance(state: WizardState): boolean {
  const page = pageNumber(state.page);
  if (page >= 7) return false;
  // entering P4 and beyond requires recorded consent
  if (page + 1 >= 4 && !state.consent) return false;
  return true;
}

export function canGoBack(state: WizardState): boolean {
  return pageNumber(state.page) > 1;
}

export function nextPage(state: WizardState): PageLabel {
  return `P${pageNumber(state.page) + 1}` as PageLabel;
}

export function previousPage(state: WizardState): PageLabel {
  return `P${pageNumber(state.page) - 1}` as PageLabel;
}

type Listener = (state: WizardState) => void;

export class Store {
  private state: WizardState = initialState();
  private listeners: Listener[] = [];

  get(): WizardState {
    return this.state;
  }

  set(patch: Partial<WizardState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  applySession(doc: SessionDoc): void {
    this.set({
      sessionId: doc.session_id,
      page: doc.page as PageLabel,
      consent: doc.consent,
      sentimentWord: doc.sentiment_word,
      ballot: doc.ballot,
    });
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}
