import { ApiClient } from './api';
import { Wizard } from './app';

const BASE_URL =
  (window as { QFI_API_BASE?: string }).QFI_API_BASE ?? window.location.origin;

const root = document.getElementById('app');
if (root) {
  const wizard = new Wizard(root, new ApiClient(BASE_URL));
  void wizard.start();
}
