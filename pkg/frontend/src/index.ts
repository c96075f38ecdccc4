export { CsvError, loadCsv, requireColumns } from "./csv.js";
export {
  axisLabel,
  extractConvergenceSeries,
  extractSweepSeries,
  renderFigure,
} from "./render.js";
export type { FigureKind, PlotSpec, Series } from "./render.js";
export { main } from "./cli.js";
