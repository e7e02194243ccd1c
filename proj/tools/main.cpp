// Command-line front end: mode counting, critical bandwidths, excess
// mass, multimodality tests and scale-space exploratory maps over CSV
// input or the bundled datasets.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "modality/bandwidth.hpp"
#include "modality/datasets.hpp"
#include "modality/excess_mass.hpp"
#include "modality/explore.hpp"
#include "modality/kde.hpp"
#include "modality/mode_test.hpp"
#include "svg.hpp"

using nlohmann::json;
using namespace modality;

namespace {

// invalid parameter combinations exit with the usage code
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string data;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string plot;
  int threads = 1;
};

Sample read_csv_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input: " + path);
  std::vector<double> values;
  std::string line;
  std::size_t value_col = 0;
  bool first = true, headered = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (first) {
      first = false;
      try {
        values.push_back(std::stod(cells.at(0)));
        continue;
      } catch (const std::invalid_argument&) {
        headered = true;
        value_col = cells.size();
        for (std::size_t c = 0; c < cells.size(); ++c)
          if (cells[c] == "value") value_col = c;
        if (value_col == cells.size())
          throw std::runtime_error("headered CSV needs a value column: " + path);
        continue;
      }
    }
    if (headered && value_col >= cells.size())
      throw std::runtime_error("ragged row in " + path);
    values.push_back(std::stod(cells[headered ? value_col : 0]));
  }
  return Sample::from_values(std::move(values));
}

Sample load_input(const std::string& data) {
  if (std::filesystem::exists(data) && !std::filesystem::is_directory(data))
    return read_csv_sample(data);
  return load_dataset(data).sample;
}

std::optional<Interval> support_from(double lowsup, double uppsup) {
  const bool lo = std::isfinite(lowsup), hi = std::isfinite(uppsup);
  if (!lo && !hi) return std::nullopt;
  if (!(lo && hi)) throw UsageError("both --lowsup and --uppsup must be finite when given");
  return Interval::closed(lowsup, uppsup);
}

json interval_json(const std::optional<Interval>& I) {
  if (!I) return nullptr;
  return json{{"lowsup", I->lo}, {"uppsup", I->hi}};
}

void emit(const CommonArgs& c, const std::string& subcommand, const json& config,
          const json& result, const std::vector<std::pair<std::string, std::string>>& csv_rows) {
  if (c.format == "json") {
    json out{{"subcommand", subcommand}, {"config", config}, {"result", result}};
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& [k, v] : csv_rows) std::cout << k << "," << v << "\n";
  }
}

std::string fmt(double v) { return svg::num(v); }

std::string join(const std::vector<double>& v, const char* sep = ";") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += fmt(v[i]);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

json config_base(const CommonArgs& c) {
  return json{{"data", c.data},
              {"seed", c.seed},
              {"format", c.format},
              {"plot", c.plot.empty() ? json(nullptr) : json(c.plot)},
              {"threads", c.threads}};
}

void add_common(CLI::App* app, CommonArgs& c, bool with_plot = false, bool with_threads = false) {
  app->add_option("--data", c.data, "dataset name or CSV path")->required();
  app->add_option("--seed", c.seed, "random seed, recorded in the output");
  app->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  if (with_plot) app->add_option("--plot", c.plot, "write an SVG rendering here");
  if (with_threads) app->add_option("--threads", c.threads, "parallel worker cap");
}

BandwidthSpec spec_from(const std::vector<double>& bws, int cbw1, int cbw2) {
  BandwidthSpec spec;
  if (!bws.empty() && (cbw1 > 0 || cbw2 > 0))
    throw UsageError("--bws and --cbw1/--cbw2 are mutually exclusive");
  if (bws.size() == 1) throw UsageError("--bws needs two values (a range) or more (a grid)");
  if (bws.size() == 2) {
    if (!(bws[0] < bws[1])) throw UsageError("--bws range must be increasing");
    spec.range = {bws[0], bws[1]};
  } else if (bws.size() > 2) {
    spec.explicit_values = bws;
  } else if (cbw1 > 0 || cbw2 > 0) {
    if (cbw1 <= 0 || cbw2 <= 0) throw UsageError("--cbw1 and --cbw2 must be given together");
    spec.cbw_modes = {cbw1, cbw2};
  }
  return spec;
}

int run(int argc, char** argv) {
  CLI::App app{"nonparametric assessment of the number and location of density modes"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- nmodes
  auto* nm = app.add_subcommand("nmodes", "number of modes at a fixed bandwidth");
  CommonArgs nm_c;
  double nm_bw = 0.0, nm_low = -INFINITY, nm_upp = INFINITY;
  int nm_n = 1 << 15;
  add_common(nm, nm_c);
  nm->add_option("--bw", nm_bw, "bandwidth")->required();
  nm->add_option("--n", nm_n, "density grid size");
  nm->add_option("--lowsup", nm_low, "lower support bound");
  nm->add_option("--uppsup", nm_upp, "upper support bound");
  nm->callback([&] {
    const Sample s = load_input(nm_c.data);
    const auto sup = support_from(nm_low, nm_upp);
    const int modes = count_modes(s, nm_bw, nm_n, sup.value_or(Interval::unbounded()));
    json cfg = config_base(nm_c);
    cfg["bw"] = nm_bw;
    cfg["n"] = nm_n;
    cfg["support"] = interval_json(sup);
    emit(nm_c, "nmodes", cfg, json{{"nmodes", modes}}, {{"nmodes", std::to_string(modes)}});
  });

  // ---------------------------------------------------------------- critbw
  auto* cb = app.add_subcommand("critbw", "critical bandwidth for a mode count");
  CommonArgs cb_c;
  int cb_mod0 = 1, cb_n = 1 << 15;
  double cb_tol = 1e-5, cb_low = -INFINITY, cb_upp = INFINITY;
  add_common(cb, cb_c);
  cb->add_option("--mod0", cb_mod0, "null number of modes");
  cb->add_option("--n", cb_n, "density grid size");
  cb->add_option("--tol", cb_tol, "bisection tolerance");
  cb->add_option("--lowsup", cb_low, "lower support bound");
  cb->add_option("--uppsup", cb_upp, "upper support bound");
  cb->callback([&] {
    const Sample s = load_input(cb_c.data);
    const auto sup = support_from(cb_low, cb_upp);
    const CriticalBandwidth r = sup ? constrained_critical_bandwidth(s, cb_mod0, *sup, cb_n, cb_tol)
                                    : critical_bandwidth(s, cb_mod0, cb_n, cb_tol);
    json cfg = config_base(cb_c);
    cfg["mod0"] = cb_mod0;
    cfg["n"] = cb_n;
    cfg["tol"] = cb_tol;
    cfg["support"] = interval_json(sup);
    json res{{"critical_bandwidth", r.value},
             {"iterations", r.iterations},
             {"lower_bound_hit", r.lower_bound_hit}};
    emit(cb_c, "critbw", cfg, res,
         {{"critical_bandwidth", fmt(r.value)},
          {"iterations", std::to_string(r.iterations)},
          {"lower_bound_hit", r.lower_bound_hit ? "true" : "false"}});
  });

  // ------------------------------------------------------------ excessmass
  auto* em = app.add_subcommand("excessmass", "excess mass statistic");
  CommonArgs em_c;
  int em_mod0 = 1;
  bool em_approx = false;
  std::vector<int> em_grid{20, 20};
  add_common(em, em_c);
  em->add_option("--mod0", em_mod0, "null number of modes");
  em->add_flag("--approximate", em_approx, "two-step approximation");
  em->add_option("--gridsize", em_grid, "approximation grid sizes")->expected(2);
  em->callback([&] {
    Sample s = load_input(em_c.data);
    bool perturbed = false;
    if (s.has_tied_values() || s.has_tied_gaps()) {
      RngStream rng = RngStream::substream(em_c.seed, 0);
      s = perturb_sample(s, rng);
      perturbed = true;
    }
    const ExcessMassResult r = em_approx ? excess_mass_approx(s, em_mod0, {em_grid[0], em_grid[1]})
                                         : excess_mass_statistic(s, em_mod0);
    json cfg = config_base(em_c);
    cfg["mod0"] = em_mod0;
    cfg["approximate"] = em_approx;
    cfg["gridsize"] = em_grid;
    auto fam = [](const std::vector<std::pair<double, double>>& v) {
      json a = json::array();
      for (const auto& [lo, hi] : v) a.push_back(json{lo, hi});
      return a;
    };
    json res{{"statistic", r.statistic}, {"lambda_star", r.lambda_star},
             {"exact", r.exact},         {"perturbed", perturbed},
             {"intervals_k", fam(r.intervals_k)}, {"intervals_k1", fam(r.intervals_k1)}};
    emit(em_c, "excessmass", cfg, res,
         {{"statistic", fmt(r.statistic)},
          {"lambda_star", fmt(r.lambda_star)},
          {"exact", r.exact ? "true" : "false"},
          {"perturbed", perturbed ? "true" : "false"}});
  });

  // -------------------------------------------------------------- modetest
  auto* mt = app.add_subcommand("modetest", "test the number of modes");
  CommonArgs mt_c;
  std::string mt_method;
  int mt_mod0 = 1, mt_sub = 1, mt_B = 500, mt_n = 1 << 10, mt_nMC = 100, mt_BMC = 100;
  double mt_tol = 1e-5, mt_tol2 = 1e-5, mt_alpha = 0.05;
  double mt_low = -INFINITY, mt_upp = INFINITY;
  std::vector<int> mt_grid{20, 20};
  bool mt_perturb = false, mt_uncentered = false, mt_fixed_bw = false;
  add_common(mt, mt_c, false, true);
  mt->add_option("--method", mt_method, "SI, HY, FM, HH or ACR")
      ->required()
      ->check(CLI::IsMember({"SI", "HY", "FM", "HH", "ACR"}));
  mt->add_option("--mod0", mt_mod0, "null number of modes");
  mt->add_option("--submethod", mt_sub, "method variant (SI, HY, ACR)");
  mt->add_option("--B", mt_B, "bootstrap replicates");
  mt->add_option("--n", mt_n, "density grid size inside the test");
  mt->add_option("--tol", mt_tol, "bisection tolerance");
  mt->add_option("--tol2", mt_tol2, "support-integration accuracy (ACR)");
  mt->add_option("--alpha", mt_alpha, "significance level (HY submethod 1)");
  mt->add_option("--nMC", mt_nMC, "Monte Carlo samples (HY submethod 2)");
  mt->add_option("--BMC", mt_BMC, "bootstrap replicates per Monte Carlo sample");
  mt->add_option("--lowsup", mt_low, "lower support bound");
  mt->add_option("--uppsup", mt_upp, "upper support bound");
  mt->add_option("--gridsize", mt_grid, "approximation grid sizes (ACR submethod 2)")->expected(2);
  mt->add_flag("--perturb", mt_perturb, "perturb ties before testing");
  mt->add_flag("--uncentered", mt_uncentered, "plain multiplicative rescaling (SI submethod 1)");
  mt->add_flag("--fixed-bw", mt_fixed_bw, "evaluate FM replicates at the observed bandwidth");
  mt->callback([&] {
    Sample s = load_input(mt_c.data);
    bool pre_perturbed = false;
    if (mt_perturb && (s.has_tied_values() || s.has_tied_gaps())) {
      RngStream rng = RngStream::substream(mt_c.seed, 1ull << 30);
      s = perturb_sample(s, rng);
      pre_perturbed = true;
    }
    const auto sup = support_from(mt_low, mt_upp);
    TestOptions opt;
    opt.B = mt_B;
    opt.grid_size = mt_n;
    opt.tol = mt_tol;
    opt.seed = mt_c.seed;
    opt.threads = mt_c.threads;

    ModeTestResult r;
    if (mt_method == "SI") {
      r = test_silverman(s, mt_mod0, opt, mt_sub, mt_uncentered);
    } else if (mt_method == "HY") {
      if (mt_mod0 != 1)
        throw UsageError("method HY tests unimodality only; its calibration does not "
                         "extend to a general number of modes (use ACR instead)");
      if (!sup) throw UsageError("method HY needs finite --lowsup and --uppsup");
      r = test_hall_york(s, *sup, opt, mt_sub, mt_alpha, mt_nMC, mt_BMC);
    } else if (mt_method == "FM") {
      r = test_fisher_marron(s, mt_mod0, opt, mt_fixed_bw);
    } else if (mt_method == "HH") {
      if (mt_mod0 != 1) throw UsageError("method HH tests unimodality only");
      r = test_hartigan(s, mt_B, mt_c.seed, mt_c.threads);
    } else {
      r = test_acr(s, mt_mod0, opt, mt_sub, {mt_grid[0], mt_grid[1]}, sup, mt_tol2);
    }

    json cfg = config_base(mt_c);
    cfg["method"] = mt_method;
    cfg["submethod"] = mt_sub;
    cfg["mod0"] = mt_mod0;
    cfg["B"] = mt_B;
    cfg["n"] = mt_n;
    cfg["tol"] = mt_tol;
    cfg["tol2"] = mt_tol2;
    cfg["alpha"] = mt_alpha;
    cfg["nMC"] = mt_nMC;
    cfg["BMC"] = mt_BMC;
    cfg["support"] = interval_json(sup);
    cfg["gridsize"] = mt_grid;
    cfg["perturb"] = mt_perturb;
    cfg["uncentered"] = mt_uncentered;
    cfg["fixed_bw"] = mt_fixed_bw;
    json res{{"method", to_string(r.method)},
             {"submethod", r.submethod},
             {"mod0", r.mod0},
             {"statistic", r.statistic},
             {"p_value", r.p_value},
             {"B", r.B},
             {"seed", r.seed},
             {"perturbed", r.perturbed || pre_perturbed}};
    if (r.alpha) res["alpha"] = *r.alpha;
    if (!r.note.empty()) res["note"] = r.note;
    emit(mt_c, "modetest", cfg, res,
         {{"method", mt_method},
          {"statistic", fmt(r.statistic)},
          {"p_value", fmt(r.p_value)},
          {"B", std::to_string(r.B)},
          {"seed", std::to_string(r.seed)}});
  });

  // -------------------------------------------------------------- locmodes
  auto* lm = app.add_subcommand("locmodes", "mode and antimode locations");
  CommonArgs lm_c;
  int lm_mod0 = 1, lm_n = 1 << 15;
  double lm_tol = 1e-5, lm_low = -INFINITY, lm_upp = INFINITY;
  add_common(lm, lm_c);
  lm->add_option("--mod0", lm_mod0, "number of modes");
  lm->add_option("--n", lm_n, "density grid size");
  lm->add_option("--tol", lm_tol, "bisection tolerance");
  lm->add_option("--lowsup", lm_low, "lower support bound");
  lm->add_option("--uppsup", lm_upp, "upper support bound");
  lm->callback([&] {
    const Sample s = load_input(lm_c.data);
    const auto sup = support_from(lm_low, lm_upp);
    const CriticalBandwidth cbw = sup
        ? constrained_critical_bandwidth(s, lm_mod0, *sup, lm_n, lm_tol)
        : critical_bandwidth(s, lm_mod0, lm_n, lm_tol);
    const ExtremaSet ex = locate_extrema(s, cbw.value, lm_n, sup.value_or(Interval::unbounded()));
    json cfg = config_base(lm_c);
    cfg["mod0"] = lm_mod0;
    cfg["n"] = lm_n;
    cfg["tol"] = lm_tol;
    cfg["support"] = interval_json(sup);
    json res{{"locations", ex.locations}, {"fvalue", ex.fvalues}, {"cbw", cbw.value}};
    if (ex.mode_count() != static_cast<std::size_t>(lm_mod0))
      res["warning"] = "located " + std::to_string(ex.mode_count()) + " modes instead of " +
                       std::to_string(lm_mod0);
    emit(lm_c, "locmodes", cfg, res,
         {{"locations", join(ex.locations)},
          {"fvalue", join(ex.fvalues)},
          {"cbw", fmt(cbw.value)}});
  });

  // -------------------------------------------------------------- modetree
  auto* tr = app.add_subcommand("modetree", "mode locations across bandwidths");
  CommonArgs tr_c;
  std::vector<double> tr_bws;
  std::vector<int> tr_grid{512, 151};
  int tr_cbw1 = 0, tr_cbw2 = 0;
  bool tr_logbw = false;
  add_common(tr, tr_c, true);
  tr->add_option("--bws", tr_bws, "bandwidth range (two values) or explicit grid");
  tr->add_option("--cbw1", tr_cbw1, "modes for the upper critical bandwidth");
  tr->add_option("--cbw2", tr_cbw2, "modes for the lower critical bandwidth");
  tr->add_option("--gridsize", tr_grid, "density points and bandwidth rows")->expected(2);
  tr->add_flag("--logbw", tr_logbw, "display bandwidths on the log10 scale");
  tr->callback([&] {
    const Sample s = load_input(tr_c.data);
    const auto tree =
        mode_tree(s, spec_from(tr_bws, tr_cbw1, tr_cbw2), {tr_grid[0], tr_grid[1]}, tr_logbw);
    json cfg = config_base(tr_c);
    cfg["bws"] = tr_bws;
    cfg["cbw1"] = tr_cbw1;
    cfg["cbw2"] = tr_cbw2;
    cfg["gridsize"] = tr_grid;
    cfg["logbw"] = tr_logbw;
    json splits = json::array();
    for (const auto& sp : tree.splits)
      splits.push_back(json{{"bandwidth", sp.bandwidth},
                            {"parent", sp.parent_location},
                            {"children", sp.child_locations}});
    json res{{"bandwidths", tree.bandwidths.values}, {"locations", tree.traces},
             {"splits", splits}};
    std::vector<std::pair<std::string, std::string>> rows;
    for (std::size_t i = 0; i < tree.traces.size(); ++i)
      rows.emplace_back(fmt(tree.bandwidths.values[i]), join(tree.traces[i]));
    if (!tr_c.plot.empty())
      write_file(tr_c.plot, svg::render_mode_tree(tree, s.min(), s.max()));
    emit(tr_c, "modetree", cfg, res, rows);
  });

  // ------------------------------------------------------------ modeforest
  auto* mf = app.add_subcommand("modeforest", "bootstrap-aggregated mode tree");
  CommonArgs mf_c;
  std::vector<double> mf_bws;
  std::vector<int> mf_grid{100, 151};
  int mf_cbw1 = 0, mf_cbw2 = 0, mf_B = 99, mf_n = 512;
  double mf_from = NAN, mf_to = NAN;
  bool mf_logbw = false;
  add_common(mf, mf_c, true, true);
  mf->add_option("--bws", mf_bws, "bandwidth range (two values) or explicit grid");
  mf->add_option("--cbw1", mf_cbw1, "modes for the upper critical bandwidth");
  mf->add_option("--cbw2", mf_cbw2, "modes for the lower critical bandwidth");
  mf->add_option("--gridsize", mf_grid, "location pixels and bandwidth rows")->expected(2);
  mf->add_option("--B", mf_B, "bootstrap trees");
  mf->add_option("--n", mf_n, "density grid size per tree");
  mf->add_option("--from", mf_from, "left edge of the location window");
  mf->add_option("--to", mf_to, "right edge of the location window");
  mf->add_flag("--logbw", mf_logbw, "display bandwidths on the log10 scale");
  mf->callback([&] {
    const Sample s = load_input(mf_c.data);
    std::optional<std::pair<double, double>> from_to;
    if (std::isfinite(mf_from) || std::isfinite(mf_to)) {
      if (!(std::isfinite(mf_from) && std::isfinite(mf_to)))
        throw UsageError("--from and --to must be given together");
      from_to = {mf_from, mf_to};
    }
    const auto forest = mode_forest(s, spec_from(mf_bws, mf_cbw1, mf_cbw2),
                                    {mf_grid[0], mf_grid[1]}, mf_B, mf_n, mf_c.seed,
                                    mf_c.threads, from_to, mf_logbw);
    json cfg = config_base(mf_c);
    cfg["bws"] = mf_bws;
    cfg["cbw1"] = mf_cbw1;
    cfg["cbw2"] = mf_cbw2;
    cfg["gridsize"] = mf_grid;
    cfg["B"] = mf_B;
    cfg["n"] = mf_n;
    cfg["from"] = std::isfinite(mf_from) ? json(mf_from) : json(nullptr);
    cfg["to"] = std::isfinite(mf_to) ? json(mf_to) : json(nullptr);
    cfg["logbw"] = mf_logbw;
    json matrix = json::array();
    std::vector<std::pair<std::string, std::string>> rows;
    for (int row = 0; row < forest.m_bw; ++row) {
      json r = json::array();
      std::string flat;
      for (int col = 0; col < forest.m_x; ++col) {
        r.push_back(forest.at(row, col));
        if (col) flat += ";";
        flat += fmt(forest.at(row, col));
      }
      matrix.push_back(std::move(r));
      rows.emplace_back(fmt(forest.range_bws.values[static_cast<std::size_t>(row)]), flat);
    }
    json res{{"modeforest", matrix},
             {"range_x", json{forest.range_x.first, forest.range_x.second}},
             {"range_bws", forest.range_bws.values}};
    if (!mf_c.plot.empty()) write_file(mf_c.plot, svg::render_mode_forest(forest));
    emit(mf_c, "modeforest", cfg, res, rows);
  });

  // ----------------------------------------------------------------- sizer
  auto* sz = app.add_subcommand("sizer", "significant zero crossings of the derivative");
  CommonArgs sz_c;
  std::vector<double> sz_bws;
  std::vector<int> sz_grid{100, 151};
  int sz_method = 1, sz_cbw1 = 0, sz_cbw2 = 0, sz_B = 500;
  double sz_alpha = 0.05, sz_n0 = 5.0, sz_from = NAN, sz_to = NAN;
  bool sz_logbw = false, sz_ess_all = false;
  add_common(sz, sz_c, true, true);
  sz->add_option("--method", sz_method, "1 pointwise, 2 simultaneous, 3/4 bootstrap");
  sz->add_option("--bws", sz_bws, "bandwidth range (two values) or explicit grid");
  sz->add_option("--cbw1", sz_cbw1, "modes for the upper critical bandwidth");
  sz->add_option("--cbw2", sz_cbw2, "modes for the lower critical bandwidth");
  sz->add_option("--gridsize", sz_grid, "location pixels and bandwidth rows")->expected(2);
  sz->add_option("--alpha", sz_alpha, "significance level");
  sz->add_option("--B", sz_B, "bootstrap replicates (methods 3 and 4)");
  sz->add_option("--n0", sz_n0, "effective sample size gate");
  sz->add_option("--from", sz_from, "left edge of the location window");
  sz->add_option("--to", sz_to, "right edge of the location window");
  sz->add_flag("--logbw", sz_logbw, "display bandwidths on the log10 scale");
  sz->add_flag("--ess-all", sz_ess_all, "average the effective sample size over all pixels");
  sz->callback([&] {
    const Sample s = load_input(sz_c.data);
    std::optional<std::pair<double, double>> from_to;
    if (std::isfinite(sz_from) || std::isfinite(sz_to)) {
      if (!(std::isfinite(sz_from) && std::isfinite(sz_to)))
        throw UsageError("--from and --to must be given together");
      from_to = {sz_from, sz_to};
    }
    const auto map = sizer(s, sz_method, spec_from(sz_bws, sz_cbw1, sz_cbw2),
                           {sz_grid[0], sz_grid[1]}, sz_alpha, sz_B, sz_n0, sz_c.seed,
                           sz_c.threads, from_to, sz_logbw, sz_ess_all);
    json cfg = config_base(sz_c);
    cfg["method"] = sz_method;
    cfg["bws"] = sz_bws;
    cfg["cbw1"] = sz_cbw1;
    cfg["cbw2"] = sz_cbw2;
    cfg["gridsize"] = sz_grid;
    cfg["alpha"] = sz_alpha;
    cfg["B"] = sz_B;
    cfg["n0"] = sz_n0;
    cfg["from"] = std::isfinite(sz_from) ? json(sz_from) : json(nullptr);
    cfg["to"] = std::isfinite(sz_to) ? json(sz_to) : json(nullptr);
    cfg["logbw"] = sz_logbw;
    cfg["ess_all"] = sz_ess_all;
    auto matrix = [&](const std::vector<double>& m) {
      json out_rows = json::array();
      for (int row = 0; row < map.m_bw; ++row) {
        json r = json::array();
        for (int col = 0; col < map.m_x; ++col) r.push_back(m[map.idx(row, col)]);
        out_rows.push_back(std::move(r));
      }
      return out_rows;
    };
    json states = json::array();
    std::vector<std::pair<std::string, std::string>> rows;
    for (int row = 0; row < map.m_bw; ++row) {
      json r = json::array();
      std::string flat;
      for (int col = 0; col < map.m_x; ++col) {
        r.push_back(map.state(row, col));
        if (col) flat += ";";
        flat += std::to_string(map.state(row, col));
      }
      states.push_back(std::move(r));
      rows.emplace_back(fmt(map.range_bws.values[static_cast<std::size_t>(row)]), flat);
    }
    json res{{"sizer", states},
             {"lower_CI", matrix(map.lower_ci)},
             {"estimate", matrix(map.estimate)},
             {"upper_CI", matrix(map.upper_ci)},
             {"ESS", matrix(map.ess)},
             {"range_x", json{map.range_x.first, map.range_x.second}},
             {"range_bws", map.range_bws.values}};
    if (!sz_c.plot.empty()) write_file(sz_c.plot, svg::render_sizer(map));
    emit(sz_c, "sizer", cfg, res, rows);
  });

  // -------------------------------------------------------------- datasets
  auto* ds = app.add_subcommand("datasets", "bundled dataset utilities");
  auto* ds_list = ds->add_subcommand("list", "list the bundled datasets");
  std::string ds_format = "json";
  ds_list->add_option("--format", ds_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  ds_list->callback([&] {
    if (ds_format == "json") {
      json out = json::array();
      for (const auto& d : dataset_catalog())
        out.push_back(json{{"name", d.name},
                           {"n", d.n},
                           {"units", d.units},
                           {"source", d.source},
                           {"checksum", d.checksum_fnv1a64},
                           {"columns", d.columns},
                           {"note", d.note}});
      std::cout << out.dump(2) << "\n";
    } else {
      for (const auto& d : dataset_catalog())
        std::cout << d.name << "," << d.n << "," << d.units << "\n";
    }
  });
  ds->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
