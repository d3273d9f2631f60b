// Minimal walkthrough: score one synthetic instance and inspect how much of
// the linearly predictable energy a (deliberately imperfect) prediction uses.

#include <iostream>

#include "scpdiag/scpdiag.hpp"

int main() {
  using namespace scpdiag;

  MultibandSpec spec;
  spec.seed = 7;
  const auto series = generate_multiband_gp(spec);

  const std::size_t n = 512;
  const std::size_t mid = series.size() / 2;
  SegmentPair pair;
  pair.history.assign(series.begin() + (mid - n), series.begin() + mid);
  pair.future.assign(series.begin() + mid, series.begin() + (mid + n));

  WelchConfig cfg;
  cfg.segment_length = 256;
  cfg.overlap = 128;

  const auto partition = make_partition(PartitionScheme::equal_width, 8);
  const auto scp = compute_scp(pair, cfg, partition);
  std::cout << "var_y   = " << scp.var_y << "\n"
            << "mse_lb  = " << scp.mse_lb << "\n"
            << "p       = " << scp.p << "\n";
  for (const auto& band : scp.band_breakdown)
    std::cout << "  " << band.label << ": var " << band.var_y << ", bound " << band.mse_lb
              << "\n";

  // FIR baseline fitted on the history, rolled out over the horizon
  RegressionSeries reg;
  reg.input.assign(pair.history.begin(), pair.history.end() - 1);
  reg.target.assign(pair.history.begin() + 1, pair.history.end());
  const auto filter = fit_fir(std::vector<RegressionSeries>{reg}, 64, 1e-6);
  PredictionTriple triple;
  triple.history = pair.history;
  triple.future = pair.future;
  triple.prediction = predict_fir(filter, pair.history, n);
  triple.model_id = "fir";

  const auto lur = compute_lur(triple, cfg, &partition);
  std::cout << "eta_linear = " << lur.eta_linear << "\n";
  if (lur.lur) std::cout << "lur        = " << *lur.lur << "\n";
  return 0;
}
