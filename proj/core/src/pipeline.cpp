#include "sentrisk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <unordered_map>

#include "sentrisk/csv.hpp"
#include "sentrisk/errors.hpp"
#include "sentrisk/eval.hpp"
#include "sentrisk/flagger.hpp"
#include "sentrisk/manifest.hpp"
#include "sentrisk/sparse_logit.hpp"
#include "sentrisk/svg.hpp"
#include "sentrisk/synth.hpp"
#include "sentrisk/version.hpp"

namespace fs = std::filesystem;

namespace sentrisk {

namespace {

// ---------------------------------------------------------------- config --

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

double parse_num(const std::string& v, const std::string& where) {
  const auto d = parse_double(v);
  if (!d) throw ConfigError(where + ": expected a number, got '" + v + "'");
  return *d;
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  const double d = parse_num(v, where);
  if (d < 0 || d != std::floor(d))
    throw ConfigError(where + ": expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(d);
}

std::size_t parse_size(const std::string& v, const std::string& where) {
  return static_cast<std::size_t>(parse_u64(v, where));
}

void apply_config_entry(PipelineConfig& cfg, const std::string& section,
                        const std::string& key, const std::string& value,
                        const std::string& where) {
  auto is = [&](const char* s, const char* k) { return section == s && key == k; };
  if (is("data", "csv")) cfg.data_path = value;
  else if (is("data", "schema")) cfg.schema_path = value;
  else if (is("data", "out")) cfg.out_dir = value;
  else if (is("data", "train_fraction")) cfg.train_fraction = parse_num(value, where);
  else if (is("split", "seed")) cfg.seed_split = parse_u64(value, where);
  else if (is("stage1", "mean_trees")) cfg.stage1.mean_trees = parse_size(value, where);
  else if (is("stage1", "scale_trees")) cfg.stage1.scale_trees = parse_size(value, where);
  else if (is("stage1", "iterations")) cfg.stage1.iterations = parse_size(value, where);
  else if (is("stage1", "burn_in")) cfg.stage1.burn_in = parse_size(value, where);
  else if (is("stage1", "thin")) cfg.stage1.thin = parse_size(value, where);
  else if (is("stage1", "snapshot_every")) cfg.stage1.snapshot_every = parse_size(value, where);
  else if (is("stage1", "min_node")) cfg.stage1.min_node = parse_size(value, where);
  else if (is("stage1", "max_cutpoints")) cfg.stage1.max_cutpoints = parse_size(value, where);
  else if (is("stage1", "seed")) cfg.seed_mcmc = parse_u64(value, where);
  else if (is("flag", "alpha")) cfg.alpha = parse_num(value, where);
  else if (is("flag", "bin_column")) cfg.bin_column = value;
  else if (is("stage2", "grid")) cfg.stage2_grid = parse_size(value, where);
  else if (is("stage2", "folds")) cfg.stage2_folds = parse_size(value, where);
  else if (is("stage2", "lambda_min_ratio"))
    cfg.stage2_lambda_min_ratio = parse_num(value, where);
  else if (is("stage2", "seed")) cfg.seed_cv = parse_u64(value, where);
  else if (is("stage2", "exclude")) cfg.exclude = split_ws(value);
  else if (is("stage2", "interactions")) {
    cfg.interactions.clear();
    for (const auto& pair : split_ws(value)) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size())
        throw ConfigError(where + ": interactions entries look like FACTOR_A:FACTOR_B, got '" +
                          pair + "'");
      cfg.interactions.push_back({pair.substr(0, colon), pair.substr(colon + 1)});
    }
  } else if (is("sweep", "alphas")) {
    cfg.sweep_alphas.clear();
    for (const auto& a : split_ws(value)) cfg.sweep_alphas.push_back(parse_num(a, where));
    if (cfg.sweep_alphas.empty()) throw ConfigError(where + ": alphas list is empty");
  } else if (is("synth", "n")) cfg.synth_n = parse_size(value, where);
  else if (is("synth", "seed")) cfg.synth_seed = parse_u64(value, where);
  else if (is("synth", "leak_shift")) cfg.synth_leak_shift = parse_num(value, where);
  else
    throw ConfigError(where + ": unknown config key [" + section + "] " + key);
}

}  // namespace

void PipelineConfig::validate_common() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie strictly between 0 and 1");
  for (double a : sweep_alphas)
    if (!(a > 0.0 && a < 1.0))
      throw ConfigError("sweep alpha values must lie strictly between 0 and 1");
  if (stage2_grid == 0) throw ConfigError("stage2 grid size must be positive");
  if (stage2_folds < 2) throw ConfigError("stage2 folds must be at least 2");
  if (!(stage2_lambda_min_ratio > 0.0 && stage2_lambda_min_ratio < 1.0))
    throw ConfigError("stage2 lambda_min_ratio must lie strictly between 0 and 1");
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  PipelineConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    apply_config_entry(cfg, section, key, value, where);
  }
  return cfg;
}

namespace {

// ------------------------------------------------------------- artifacts --

struct StageWriter {
  std::string dir;
  Manifest man;
  StageResult res;

  StageWriter(std::string out_dir, std::string stage) : dir(std::move(out_dir)) {
    man.stage = std::move(stage);
    man.version = kVersion;
    fs::create_directories(dir);
  }

  void input(const std::string& path) { man.inputs.emplace_back(path, hash_file(path)); }
  void param(const std::string& k, const std::string& v) { man.params.emplace_back(k, v); }
  void param(const std::string& k, double v) { man.params.emplace_back(k, format_double(v)); }
  void param(const std::string& k, std::size_t v) {
    man.params.emplace_back(k, std::to_string(v));
  }
  void seed(const std::string& k, std::uint64_t v) { man.seeds.emplace_back(k, v); }

  std::string fingerprint() const { return man.fingerprint(); }

  void put(const std::string& rel, const std::string& content) {
    const fs::path p = fs::path(dir) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write artifact '" + p.string() + "'");
    out << content;
    out.close();
    man.outputs.emplace_back(rel, fnv1a64_hex(content));
    res.files.push_back(rel);
  }

  StageResult finish(const std::string& manifest_name) {
    res.manifest_hash = man.fingerprint();
    const std::string json = man.to_json();
    const fs::path p = fs::path(dir) / manifest_name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write manifest '" + p.string() + "'");
    out << json;
    res.files.push_back(manifest_name);
    return res;
  }
};

std::string comment_line(const std::string& fp) { return "#manifest=" + fp + "\n"; }

const char* split_name(SplitPart p) {
  switch (p) {
    case SplitPart::train: return "train";
    case SplitPart::test: return "test";
    default: return "unassigned";
  }
}

SplitPart split_from(const std::string& s, const std::string& where) {
  if (s == "train") return SplitPart::train;
  if (s == "test") return SplitPart::test;
  if (s == "unassigned") return SplitPart::unassigned;
  throw DataError(where + ": unknown split label '" + s + "'");
}

// ------------------------------------------------------- artifact tables --

struct SummaryRow {
  std::int64_t row_id = 0;
  SplitPart split = SplitPart::unassigned;
  double y = 0.0, f_bar = 0.0, s_bar = 0.0;
  double threshold = 0.0;  // flags.csv only
  std::uint8_t flag = 0;   // flags.csv only
};

std::vector<SummaryRow> read_summary_like(const std::string& path, bool with_flags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvReader reader(in, path);
  std::vector<std::string> header;
  if (!reader.next(header)) throw DataError(path + ": empty CSV file");
  auto col = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError(path + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = col("row_id"), c_split = col("split"), c_y = col("y_months"),
                    c_f = col("f_bar"), c_s = col("s_bar");
  const std::size_t c_thr = with_flags ? col("threshold") : 0;
  const std::size_t c_flag = with_flags ? col("flag") : 0;

  std::vector<SummaryRow> rows;
  std::vector<std::string> rec;
  while (reader.next(rec)) {
    if (rec.size() < header.size())
      throw DataError(path + ": short record " + std::to_string(reader.record_number()));
    SummaryRow r;
    const auto id = parse_double(rec[c_id]);
    const auto y = parse_double(rec[c_y]);
    const auto f = parse_double(rec[c_f]);
    const auto s = parse_double(rec[c_s]);
    if (!id || !y || !f || !s)
      throw DataError(path + ": unparseable record " + std::to_string(reader.record_number()));
    r.row_id = static_cast<std::int64_t>(*id);
    r.split = split_from(rec[c_split], path);
    r.y = *y;
    r.f_bar = *f;
    r.s_bar = *s;
    if (with_flags) {
      const auto t = parse_double(rec[c_thr]);
      const auto fl = parse_double(rec[c_flag]);
      if (!t || !fl)
        throw DataError(path + ": unparseable record " + std::to_string(reader.record_number()));
      r.threshold = *t;
      r.flag = *fl != 0.0 ? 1 : 0;
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  return rows;
}

std::string render_summary_csv(const std::vector<SummaryRow>& rows, const std::string& fp,
                               bool with_flags) {
  std::ostringstream ss;
  ss << comment_line(fp);
  ss << (with_flags ? "row_id,split,y_months,f_bar,s_bar,threshold,flag\n"
                    : "row_id,split,y_months,f_bar,s_bar\n");
  for (const auto& r : rows) {
    ss << r.row_id << ',' << split_name(r.split) << ',' << format_double(r.y) << ','
       << format_double(r.f_bar) << ',' << format_double(r.s_bar);
    if (with_flags)
      ss << ',' << format_double(r.threshold) << ',' << static_cast<int>(r.flag);
    ss << '\n';
  }
  return ss.str();
}

std::string render_trace_csv(const std::vector<double>& trace, const std::string& fp) {
  std::ostringstream ss;
  ss << comment_line(fp) << "draw,value\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    ss << i << ',' << format_double(trace[i]) << '\n';
  return ss.str();
}

std::vector<double> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvReader reader(in, path);
  std::vector<std::string> rec;
  if (!reader.next(rec)) throw DataError(path + ": empty CSV file");
  std::vector<double> out;
  while (reader.next(rec)) {
    if (rec.size() < 2) throw DataError(path + ": short record");
    const auto v = parse_double(rec[1]);
    if (!v) throw DataError(path + ": unparseable trace value");
    out.push_back(*v);
  }
  return out;
}

// ------------------------------------------------------------ data flow --

struct LoadedData {
  Schema schema;
  Dataset ds;  // preprocessed; split only when requested
  PreprocessLog log;
};

LoadedData load_dataset(const PipelineConfig& cfg, bool with_split) {
  if (cfg.schema_path.empty()) throw ConfigError("schema path is required (data.schema)");
  if (cfg.data_path.empty()) throw ConfigError("data path is required (data.csv)");
  LoadedData out;
  out.schema = load_schema(cfg.schema_path);
  Dataset raw = load_csv(cfg.data_path, out.schema);
  out.ds = preprocess(raw, &out.log);
  if (with_split) out.ds = split(out.ds, cfg.train_fraction, cfg.seed_split);
  return out;
}

void add_preprocess_params(StageWriter& w, const PreprocessLog& log) {
  w.param("rows_in", log.rows_in);
  w.param("rows_dropped_missing_outcome", log.dropped_missing_outcome);
  w.param("outcome_cells_capped", log.capped_outcome);
  w.param("categorical_cells_to_unknown", log.categorical_to_unknown);
  w.param("enhancement_cells_zero_filled", log.enhancement_to_zero);
}

struct Stage2Data {
  DesignMatrix train, test;
  std::vector<std::uint8_t> y_train, y_test;
  std::vector<std::string> dropped_constant;
  std::size_t rows_without_flags = 0;
};

// Joins the stage-2 design with the flag table by row id; the split comes
// from the flag artifact so stages stay decoupled. Constant columns are
// detected on the training rows and dropped from both parts.
Stage2Data make_stage2_data(const PipelineConfig& cfg, const Dataset& ds,
                            const std::vector<SummaryRow>& flags) {
  DesignMatrix Z = build_design(ds, ColumnRole::irrelevant, cfg.interactions, false);
  if (!cfg.exclude.empty()) Z = drop_columns(Z, cfg.exclude);
  if (Z.n_cols == 0) throw ConfigError("stage 2 design has no columns left");

  std::unordered_map<std::int64_t, const SummaryRow*> by_id;
  by_id.reserve(flags.size());
  for (const auto& r : flags) by_id[r.row_id] = &r;

  Stage2Data out;
  DesignMatrix tr, te;
  tr.n_cols = te.n_cols = Z.n_cols;
  tr.column_names = te.column_names = Z.column_names;
  tr.column_groups = te.column_groups = Z.column_groups;
  for (std::size_t i = 0; i < Z.n_rows; ++i) {
    const auto it = by_id.find(Z.row_ids[i]);
    if (it == by_id.end()) {
      ++out.rows_without_flags;
      continue;
    }
    const SummaryRow& fr = *it->second;
    DesignMatrix& dst = fr.split == SplitPart::test ? te : tr;
    const double* row = Z.row(i);
    dst.values.insert(dst.values.end(), row, row + Z.n_cols);
    dst.row_ids.push_back(Z.row_ids[i]);
    dst.split.push_back(fr.split);
    (fr.split == SplitPart::test ? out.y_test : out.y_train).push_back(fr.flag);
  }
  tr.n_rows = tr.row_ids.size();
  te.n_rows = te.row_ids.size();
  if (tr.n_rows == 0) throw DataError("stage 2: no training rows after joining flags");

  out.train = drop_constant_columns(tr, &out.dropped_constant);
  out.test = out.dropped_constant.empty() ? std::move(te)
                                          : drop_columns(te, out.dropped_constant);
  return out;
}

std::string render_cv_curve_csv(const LogitPath& path, const std::string& fp) {
  std::ostringstream ss;
  ss << comment_line(fp) << "lambda,cv_auc_mean,cv_auc_se,nonzero\n";
  for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
    ss << format_double(path.lambdas[l]) << ',';
    if (l < path.cv_auc_mean.size()) ss << format_double(path.cv_auc_mean[l]);
    ss << ',';
    if (l < path.cv_auc_se.size()) ss << format_double(path.cv_auc_se[l]);
    ss << ',' << path.nonzero[l] << '\n';
  }
  return ss.str();
}

std::string render_coefficients_csv(const SparseLogitModel& model, const std::string& fp) {
  std::ostringstream ss;
  ss << comment_line(fp) << "factor,columns,nonzero,min_coef,max_coef\n";
  for (const auto& row : coefficient_report(model))
    ss << csv_escape(row.factor) << ',' << row.columns << ',' << row.nonzero << ','
       << format_double(row.min_coef) << ',' << format_double(row.max_coef) << '\n';
  return ss.str();
}

std::string render_model_text(const SparseLogitModel& model, const std::string& fp) {
  std::ostringstream ss;
  save_logit_model(ss, model, fp);
  return ss.str();
}

struct Stage2Fit {
  LogitPath path;
  SparseLogitModel model;
};

Stage2Fit fit_stage2(const PipelineConfig& cfg, Stage2Data& st2) {
  SparseLogitOptions opt;
  opt.lambda_min_ratio = cfg.stage2_lambda_min_ratio;
  opt.cv_folds = cfg.stage2_folds;
  Stage2Fit fit;
  fit.path = fit_path(st2.train, st2.y_train, cfg.stage2_grid, opt);
  fit.model = select_lambda(fit.path, st2.train, st2.y_train, cfg.seed_cv, opt);
  return fit;
}

}  // namespace

// ------------------------------------------------------------- stages ----

StageResult run_synth(const PipelineConfig& cfg) {
  cfg.validate_common();
  if (cfg.synth_n < 100) throw ConfigError("synth: n must be at least 100");
  SynthSpec spec = default_synth_spec(cfg.synth_n, cfg.synth_seed, cfg.synth_leak_shift);
  SynthResult result = generate(spec);

  StageWriter w(cfg.out_dir, "synth");
  w.param("n", cfg.synth_n);
  w.param("leak_shift", cfg.synth_leak_shift);
  w.param("outcome", spec.outcome_name);
  w.seed("synth", cfg.synth_seed);
  const std::string fp = w.fingerprint();

  {
    std::ostringstream ss;
    ss << "# manifest=" << fp << '\n';
    write_schema(ss, result.schema);
    w.put("schema.cols", ss.str());
  }
  {
    std::ostringstream ss;
    ss << comment_line(fp);
    std::vector<std::string> header;
    for (const auto& col : result.data.columns) header.push_back(col.spec.name);
    write_csv_row(ss, header);
    std::vector<std::string> rec(header.size());
    for (std::size_t r = 0; r < result.data.n_rows(); ++r) {
      for (std::size_t c = 0; c < result.data.columns.size(); ++c)
        rec[c] = result.data.columns[c].cell_text(r);
      write_csv_row(ss, rec);
    }
    w.put("data.csv", ss.str());
  }
  {
    std::ostringstream ss;
    ss << comment_line(fp) << "row_id,f0,s0,leak_shift\n";
    for (std::size_t r = 0; r < result.data.n_rows(); ++r)
      ss << result.data.row_ids[r] << ',' << format_double(result.truth.f0[r]) << ','
         << format_double(result.truth.s0[r]) << ','
         << format_double(result.truth.leak_shift[r]) << '\n';
    w.put("truth.csv", ss.str());
  }
  return w.finish("manifest-synth.json");
}

StageResult run_train_stage1(const PipelineConfig& cfg) {
  cfg.validate_common();
  cfg.stage1.validate();
  LoadedData data = load_dataset(cfg, /*with_split=*/true);

  DesignMatrix X = build_design(data.ds, ColumnRole::relevant, {}, false);
  DesignMatrix Xtr = filter_rows(X, SplitPart::train);
  DesignMatrix Xte = filter_rows(X, SplitPart::test);
  std::vector<double> ytr = gather_outcome(data.ds, Xtr);
  std::vector<double> yte = gather_outcome(data.ds, Xte);

  TreeEnsembleModel model = fit(Xtr, ytr, cfg.stage1, cfg.seed_mcmc);

  std::vector<SummaryRow> rows;
  rows.reserve(X.n_rows);
  for (std::size_t i = 0; i < Xtr.n_rows; ++i)
    rows.push_back({Xtr.row_ids[i], SplitPart::train, ytr[i],
                    model.train_summary.f_bar[i], model.train_summary.s_bar[i], 0.0, 0});
  if (Xte.n_rows > 0) {
    PosteriorSummary pred = predict(model, Xte);
    for (std::size_t i = 0; i < Xte.n_rows; ++i)
      rows.push_back({Xte.row_ids[i], SplitPart::test, yte[i], pred.f_bar[i], pred.s_bar[i],
                      0.0, 0});
  }
  std::sort(rows.begin(), rows.end(),
            [](const SummaryRow& a, const SummaryRow& b) { return a.row_id < b.row_id; });

  StageWriter w(cfg.out_dir, "train-stage1");
  w.input(cfg.schema_path);
  w.input(cfg.data_path);
  add_preprocess_params(w, data.log);
  w.param("train_fraction", cfg.train_fraction);
  w.param("mean_trees", cfg.stage1.mean_trees);
  w.param("scale_trees", cfg.stage1.scale_trees);
  w.param("iterations", cfg.stage1.iterations);
  w.param("burn_in", cfg.stage1.burn_in);
  w.param("thin", cfg.stage1.thin);
  w.param("snapshot_every", cfg.stage1.snapshot_every);
  w.param("min_node", cfg.stage1.min_node);
  w.param("max_cutpoints", cfg.stage1.max_cutpoints);
  w.param("design_columns", X.n_cols);
  w.seed("split", cfg.seed_split);
  w.seed("mcmc", cfg.seed_mcmc);
  const std::string fp = w.fingerprint();

  {
    std::ostringstream ss;
    save_model(ss, model, fp);
    w.put("hbart_model.txt", ss.str());
  }
  w.put("summary.csv", render_summary_csv(rows, fp, /*with_flags=*/false));
  w.put("trace_f.csv", render_trace_csv(model.train_summary.trace_f, fp));
  w.put("trace_s.csv", render_trace_csv(model.train_summary.trace_s, fp));
  return w.finish("manifest-train-stage1.json");
}

StageResult run_flag(const PipelineConfig& cfg) {
  cfg.validate_common();
  const std::string summary_path = (fs::path(cfg.out_dir) / "summary.csv").string();
  std::vector<SummaryRow> rows = read_summary_like(summary_path, /*with_flags=*/false);

  const FlagConfig fcfg = make_flag_config(cfg.alpha);
  std::vector<double> f, s, y;
  f.reserve(rows.size());
  for (const auto& r : rows) {
    f.push_back(r.f_bar);
    s.push_back(r.s_bar);
    y.push_back(r.y);
  }
  const FlagSet flags = flag(f, s, y, fcfg);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].threshold = flags.thresholds[i];
    rows[i].flag = flags.labels[i];
  }

  StageWriter w(cfg.out_dir, "flag");
  w.input(summary_path);
  w.param("alpha", cfg.alpha);
  w.param("quantile_z", fcfg.quantile_z);

  // Flag-rate table keyed by a dataset factor when configured.
  std::vector<std::string> bin_key(rows.size(), "all");
  if (!cfg.bin_column.empty()) {
    LoadedData data = load_dataset(cfg, /*with_split=*/false);
    const Column* col = data.ds.find_column(cfg.bin_column);
    if (!col)
      throw ConfigError("flag bin_column '" + cfg.bin_column + "' is not a schema column");
    std::unordered_map<std::int64_t, std::size_t> pos;
    for (std::size_t r = 0; r < data.ds.n_rows(); ++r) pos[data.ds.row_ids[r]] = r;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto it = pos.find(rows[i].row_id);
      if (it == pos.end()) {
        bin_key[i] = "(absent)";
        continue;
      }
      const std::string cell = col->cell_text(it->second);
      bin_key[i] = cell.empty() ? "(missing)" : cell;
    }
    w.input(cfg.schema_path);
    w.input(cfg.data_path);
    w.param("bin_column", cfg.bin_column);
  }
  const BinRateTable table = flag_rate_by_bin(flags, bin_key);

  const std::string fp = w.fingerprint();
  w.put("flags.csv", render_summary_csv(rows, fp, /*with_flags=*/true));
  {
    std::ostringstream ss;
    ss << comment_line(fp) << "bin,count,flagged,fraction\n";
    for (const auto& r : table.rows)
      ss << csv_escape(r.bin) << ',' << r.count << ',' << r.flagged << ','
         << format_double(r.fraction) << '\n';
    w.put("flag_rate_by_bin.csv", ss.str());
  }
  return w.finish("manifest-flag.json");
}

StageResult run_train_stage2(const PipelineConfig& cfg) {
  cfg.validate_common();
  const std::string flags_path = (fs::path(cfg.out_dir) / "flags.csv").string();
  std::vector<SummaryRow> flags = read_summary_like(flags_path, /*with_flags=*/true);
  LoadedData data = load_dataset(cfg, /*with_split=*/false);
  Stage2Data st2 = make_stage2_data(cfg, data.ds, flags);

  Stage2Fit fit = fit_stage2(cfg, st2);

  StageWriter w(cfg.out_dir, "train-stage2");
  w.input(cfg.schema_path);
  w.input(cfg.data_path);
  w.input(flags_path);
  w.param("grid", cfg.stage2_grid);
  w.param("folds", cfg.stage2_folds);
  w.param("lambda_min_ratio", cfg.stage2_lambda_min_ratio);
  w.param("lambda_selected", fit.model.lambda);
  w.param("train_rows", st2.train.n_rows);
  w.param("design_columns", st2.train.n_cols);
  w.param("rows_without_flags", st2.rows_without_flags);
  {
    std::string joined;
    for (const auto& d : st2.dropped_constant) {
      if (!joined.empty()) joined += ' ';
      joined += d;
    }
    w.param("dropped_constant_columns", joined);
  }
  for (const auto& ia : cfg.interactions)
    w.param("interaction", ia.left + ":" + ia.right);
  w.seed("cv", cfg.seed_cv);

  const std::string fp = w.fingerprint();
  w.put("logit_model.txt", render_model_text(fit.model, fp));
  w.put("cv_curve.csv", render_cv_curve_csv(fit.path, fp));
  w.put("coefficients.csv", render_coefficients_csv(fit.model, fp));
  return w.finish("manifest-train-stage2.json");
}

StageResult run_evaluate(const PipelineConfig& cfg) {
  cfg.validate_common();
  const std::string flags_path = (fs::path(cfg.out_dir) / "flags.csv").string();
  const std::string model_path = (fs::path(cfg.out_dir) / "logit_model.txt").string();
  const std::string summary_path = (fs::path(cfg.out_dir) / "summary.csv").string();

  std::vector<SummaryRow> flags = read_summary_like(flags_path, /*with_flags=*/true);
  SparseLogitModel model;
  {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + model_path + "'");
    model = load_logit_model(in, model_path);
  }
  LoadedData data = load_dataset(cfg, /*with_split=*/false);
  Stage2Data st2 = make_stage2_data(cfg, data.ds, flags);

  const std::vector<double> score_tr = predict_risk(model, st2.train);
  const RocCurve roc_tr = auc(score_tr, st2.y_train);
  const bool have_test = st2.test.n_rows > 0;
  std::vector<double> score_te;
  RocCurve roc_te;
  if (have_test) {
    score_te = predict_risk(model, st2.test);
    roc_te = auc(score_te, st2.y_test);
  }

  StageWriter w(cfg.out_dir, "evaluate");
  w.input(cfg.schema_path);
  w.input(cfg.data_path);
  w.input(flags_path);
  w.input(model_path);
  w.param("risk_bin_count", std::size_t{5});
  const std::string fp = w.fingerprint();

  {
    std::ostringstream ss;
    ss << comment_line(fp) << "split,n,positives,auc,band\n";
    std::size_t pos_tr = 0;
    for (auto v : st2.y_train) pos_tr += v;
    ss << "train," << st2.train.n_rows << ',' << pos_tr << ',' << format_double(roc_tr.auc)
       << ',' << auc_band(roc_tr.auc) << '\n';
    if (have_test) {
      std::size_t pos_te = 0;
      for (auto v : st2.y_test) pos_te += v;
      ss << "test," << st2.test.n_rows << ',' << pos_te << ',' << format_double(roc_te.auc)
         << ',' << auc_band(roc_te.auc) << '\n';
    }
    w.put("auc_summary.csv", ss.str());
  }

  if (have_test) {
    {
      std::ostringstream ss;
      ss << comment_line(fp) << "fpr,tpr\n";
      for (const auto& p : roc_te.points)
        ss << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
      w.put("roc_test.csv", ss.str());
    }
    {
      std::ostringstream ss;
      write_roc_svg(ss, roc_te, "Flag risk ROC (test)", fp);
      w.put("roc_test.svg", ss.str());
    }
    if (st2.test.n_rows >= 5) {
      const RiskBinTable bins = risk_bins(score_te, st2.y_test, 5);
      {
        std::ostringstream ss;
        ss << comment_line(fp) << "bin,count,flagged,fraction,score_min,score_max\n";
        for (std::size_t b = 0; b < bins.bins.size(); ++b)
          ss << (b + 1) << ',' << bins.bins[b].count << ',' << bins.bins[b].flagged << ','
             << format_double(bins.bins[b].fraction) << ','
             << format_double(bins.bins[b].score_min) << ','
             << format_double(bins.bins[b].score_max) << '\n';
        w.put("risk_bins_test.csv", ss.str());
      }
      {
        std::ostringstream ss;
        write_risk_bins_svg(ss, bins, "Flag rate by risk-score quintile (test)", fp);
        w.put("risk_bins_test.svg", ss.str());
      }
    }
  }

  // Sampler convergence diagnostics when the stage-1 traces are present.
  const std::string tf_path = (fs::path(cfg.out_dir) / "trace_f.csv").string();
  const std::string ts_path = (fs::path(cfg.out_dir) / "trace_s.csv").string();
  if (fs::exists(tf_path) && fs::exists(ts_path)) {
    const std::vector<double> tf = read_trace_csv(tf_path);
    const std::vector<double> ts = read_trace_csv(ts_path);
    std::ostringstream ss;
    ss << comment_line(fp) << "chain,z,p_value,mean_first,mean_last\n";
    const GewekeResult gf = geweke(tf);
    const GewekeResult gs = geweke(ts);
    ss << "mean_fit," << format_double(gf.z) << ',' << format_double(gf.p_value) << ','
       << format_double(gf.mean_first) << ',' << format_double(gf.mean_last) << '\n';
    ss << "scale_fit," << format_double(gs.z) << ',' << format_double(gs.p_value) << ','
       << format_double(gs.mean_first) << ',' << format_double(gs.mean_last) << '\n';
    w.put("geweke.csv", ss.str());
  }

  // Stage-1 fit quality from the summary artifact.
  if (fs::exists(summary_path)) {
    const std::vector<SummaryRow> srows = read_summary_like(summary_path, false);
    const DesignMatrix X1 = build_design(data.ds, ColumnRole::relevant, {}, false);
    const std::size_t p = X1.n_cols;
    std::ostringstream ss;
    ss << comment_line(fp) << "split,n,p,r2,adjusted\n";
    for (const SplitPart part : {SplitPart::train, SplitPart::test}) {
      std::vector<double> fb, yy;
      for (const auto& r : srows)
        if (r.split == part) {
          fb.push_back(r.f_bar);
          yy.push_back(r.y);
        }
      if (fb.size() <= p + 1) continue;
      const RSquared rs = r_squared(fb, yy, p);
      ss << split_name(part) << ',' << fb.size() << ',' << p << ','
         << format_double(rs.r2) << ',' << format_double(rs.adjusted) << '\n';
    }
    w.put("r_squared.csv", ss.str());
  }
  return w.finish("manifest-evaluate.json");
}

StageResult run_sweep_alpha(const PipelineConfig& cfg) {
  cfg.validate_common();
  const std::string summary_path = (fs::path(cfg.out_dir) / "summary.csv").string();
  std::vector<SummaryRow> summary = read_summary_like(summary_path, /*with_flags=*/false);
  LoadedData data = load_dataset(cfg, /*with_split=*/false);

  std::vector<double> f, s, y;
  f.reserve(summary.size());
  for (const auto& r : summary) {
    f.push_back(r.f_bar);
    s.push_back(r.s_bar);
    y.push_back(r.y);
  }

  struct AlphaOut {
    AlphaAucRow row;
    std::vector<SummaryRow> flags;
    Stage2Fit fit;
  };
  auto run_alpha = [&](double alpha) {
    AlphaOut out;
    const FlagConfig fcfg = make_flag_config(alpha);
    const FlagSet flags = flag(f, s, y, fcfg);
    out.flags = summary;
    for (std::size_t i = 0; i < out.flags.size(); ++i) {
      out.flags[i].threshold = flags.thresholds[i];
      out.flags[i].flag = flags.labels[i];
    }
    Stage2Data st2 = make_stage2_data(cfg, data.ds, out.flags);
    out.fit = fit_stage2(cfg, st2);
    out.row.alpha = alpha;
    out.row.train_auc = auc(predict_risk(out.fit.model, st2.train), st2.y_train).auc;
    out.row.test_auc = st2.test.n_rows > 0
                           ? auc(predict_risk(out.fit.model, st2.test), st2.y_test).auc
                           : 0.0;
    return out;
  };

  std::vector<std::future<AlphaOut>> jobs;
  jobs.reserve(cfg.sweep_alphas.size());
  for (double a : cfg.sweep_alphas)
    jobs.push_back(std::async(std::launch::async, run_alpha, a));

  StageWriter w(cfg.out_dir, "sweep-alpha");
  w.input(cfg.schema_path);
  w.input(cfg.data_path);
  w.input(summary_path);
  {
    std::string alphas;
    for (double a : cfg.sweep_alphas) {
      if (!alphas.empty()) alphas += ' ';
      alphas += format_double(a);
    }
    w.param("alphas", alphas);
  }
  w.param("grid", cfg.stage2_grid);
  w.param("folds", cfg.stage2_folds);
  w.seed("cv", cfg.seed_cv);
  const std::string fp = w.fingerprint();

  std::ostringstream table;
  table << comment_line(fp) << "alpha,train_auc,test_auc\n";
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    AlphaOut out = jobs[k].get();
    table << format_double(out.row.alpha) << ',' << format_double(out.row.train_auc) << ','
          << format_double(out.row.test_auc) << '\n';
    const std::string sub = "alpha_" + format_double(out.row.alpha, 2);
    w.put(sub + "/flags.csv", render_summary_csv(out.flags, fp, /*with_flags=*/true));
    w.put(sub + "/logit_model.txt", render_model_text(out.fit.model, fp));
    w.put(sub + "/cv_curve.csv", render_cv_curve_csv(out.fit.path, fp));
    w.put(sub + "/coefficients.csv", render_coefficients_csv(out.fit.model, fp));
  }
  w.put("model2_aucs.csv", table.str());
  return w.finish("manifest-sweep-alpha.json");
}

}  // namespace sentrisk
