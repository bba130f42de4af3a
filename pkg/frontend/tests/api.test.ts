import { describe, expect, inject, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api';

const client = () => new ApiClient(inject('gatewayUrl'));

describe('api client against a live gateway', () => {
  it('creates sessions at P1', async () => {
    const doc = await client().createSession();
    expect(doc.page).toBe('P1');
    expect(doc.consent).toBe(false);
  });

  it('surfaces server error codes', async () => {
    const api = client();
    const session = await api.createSession();
    try {
      await api.advancePage(session.session_id, 'P5');
      throw new Error('expected rejection');
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).status).toBe(422);
      expect((error as ApiError).code).toBe('invalid_transition');
    }
  });

  it('lists ten devices with impact estimates', async () => {
    const { devices } = await client().listDevices('eu-north');
    expect(devices).toHaveLength(10);
    const architectures = new Set(devices.map((d) => d.architecture));
    expect(architectures).toContain('TrappedIon');
    for (const device of devices) {
      expect(device.impact.carbon_g).toBeGreaterThanOrEqual(0);
    }
  });

  it('returns the five-primitive registry with halved hash bits', async () => {
    const { primitives } = await client().vulnerability();
    expect(primitives).toHaveLength(5);
    const sha = primitives.find((p) => p.name === 'SHA-256')!;
    expect(sha.quantum_bits * 2).toBe(sha.classical_bits);
    expect(sha.status).toBe('Weakened');
  });
});
