export { KINDS, renderFigure } from "./figures";
export type { FigureOptions, Kind } from "./figures";
export { renderHeatmap } from "./figures/heatmap";
export { renderHistory } from "./figures/history";
export { renderRate } from "./figures/rate";
export { renderSlices } from "./figures/slices";
export { renderSnapshots } from "./figures/snapshots";
export { rateFit, rateFitLine } from "./ratefit";
export { defaultTimes, levelForTime, loadRun, timeOfLevel } from "./run";
export type { RunData } from "./run";
export { FIELD_COLUMNS, ParseError, parseFields, parseHistory, parseMeta } from "./schema";
export type { RunHistory, RunMeta } from "./schema";
