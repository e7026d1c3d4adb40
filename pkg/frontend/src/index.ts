import { WaveRollElement } from './element.js';

export { WaveRollElement } from './element.js';
export { Transport } from './transport.js';
export { EngineClient } from './client.js';
export { computeDrawList, peaksForWindow } from './drawlist.js';

if (typeof customElements !== 'undefined' && !customElements.get('wave-roll')) {
  customElements.define('wave-roll', WaveRollElement);
}
