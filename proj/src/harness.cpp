#include "ssimpc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "ssimpc/rng.hpp"
#include "ssimpc/svg.hpp"

namespace fs = std::filesystem;

namespace ssimpc {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string num_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

const char* kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::ssi_mpc:
      return "ssi_mpc";
    case ControllerKind::nominal_mpc:
      return "nominal_mpc";
    default:
      return "clairvoyant_mpc";
  }
}

/// Runs fn(0..count-1) across up to `workers` threads; the first exception
/// wins and is rethrown on the caller's thread.
void run_jobs(std::size_t count, int workers,
              const std::function<void(std::size_t)>& fn) {
  const int k = std::max(
      1, std::min<int>(workers, static_cast<int>(count)));
  if (k == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Job {
  ControllerKind kind = ControllerKind::ssi_mpc;
  int feature_count = 0;
  LearningRateSpec lr;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::string file_base;
};

std::string job_file_base(const Job& job) {
  std::ostringstream s;
  s << "ep_" << kind_name(job.kind) << "_M" << job.feature_count << "_eta"
    << num_short(job.lr.value) << "_r" << job.repeat;
  return s.str();
}

RunArtifacts execute_jobs(const ScenarioConfig& cfg,
                          const std::vector<Job>& jobs, int workers) {
  RunArtifacts art;
  art.output_dir = cfg.run.output_dir;
  const fs::path dir(cfg.run.output_dir);
  fs::create_directories(dir / "episodes");

  art.episodes.resize(jobs.size());
  run_jobs(jobs.size(), workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const EpisodeConfig episode =
        assemble_episode(cfg, job.seed, job.kind, job.feature_count, job.lr);
    const TrajectoryLog log = run_episode(episode);
    const std::string path = (dir / "episodes" / (job.file_base + ".csv")).string();
    write_file_atomic(path, episode_csv(log));

    EpisodeResult r;
    r.csv_path = path;
    r.controller = job.kind;
    r.feature_count = job.feature_count;
    r.learning_rate = job.lr.value;
    r.repeat = job.repeat;
    r.seed = job.seed;
    r.steps = static_cast<int>(log.steps.size());
    r.failed = log.failed;
    r.cumulative_cost = log.cumulative_cost;
    r.cumulative_state_sq = log.cumulative_state_sq;
    r.rmse_reference = log.rmse_reference;
    art.episodes[i] = r;
  });

  std::string summary =
      "name,controller,feature_count,learning_rate,repeat,seed,steps,failed,"
      "cumulative_cost,cumulative_state_sq,rmse_reference\n";
  for (const EpisodeResult& r : art.episodes) {
    if (r.failed) ++art.failures;
    std::ostringstream row;
    row << cfg.name << "," << kind_name(r.controller) << "," << r.feature_count
        << "," << num_short(r.learning_rate) << "," << r.repeat << ","
        << r.seed << "," << r.steps << "," << (r.failed ? 1 : 0) << ","
        << num(r.cumulative_cost) << "," << num(r.cumulative_state_sq) << ","
        << num(r.rmse_reference) << "\n";
    summary += row.str();
  }
  art.summary_path = (dir / "summary.csv").string();
  write_file_atomic(art.summary_path, summary);

  // Digest: medians per (controller, M, eta) group over non-failed episodes.
  struct Group {
    ControllerKind kind;
    int feature_count;
    double learning_rate;
    int episodes = 0;
    int failures = 0;
    std::vector<double> cost, state_sq, rmse;
  };
  std::vector<Group> groups;
  for (const EpisodeResult& r : art.episodes) {
    Group* g = nullptr;
    for (Group& cand : groups) {
      if (cand.kind == r.controller && cand.feature_count == r.feature_count &&
          cand.learning_rate == r.learning_rate) {
        g = &cand;
        break;
      }
    }
    if (g == nullptr) {
      groups.push_back(Group{r.controller, r.feature_count, r.learning_rate});
      g = &groups.back();
    }
    ++g->episodes;
    if (r.failed) {
      ++g->failures;
    } else {
      g->cost.push_back(r.cumulative_cost);
      g->state_sq.push_back(r.cumulative_state_sq);
      g->rmse.push_back(r.rmse_reference);
    }
  }
  json digest;
  digest["scenario"] = cfg.name;
  digest["episodes"] = art.episodes.size();
  digest["failures"] = art.failures;
  digest["groups"] = json::array();
  for (const Group& g : groups) {
    json entry;
    entry["controller"] = kind_name(g.kind);
    entry["feature_count"] = g.feature_count;
    entry["learning_rate"] = g.learning_rate;
    entry["episodes"] = g.episodes;
    entry["failures"] = g.failures;
    if (g.cost.empty()) {
      entry["median_cumulative_cost"] = nullptr;
      entry["median_cumulative_state_sq"] = nullptr;
      entry["median_rmse_reference"] = nullptr;
    } else {
      entry["median_cumulative_cost"] = median(g.cost);
      entry["median_cumulative_state_sq"] = median(g.state_sq);
      entry["median_rmse_reference"] = median(g.rmse);
    }
    digest["groups"].push_back(entry);
  }
  art.digest_path = (dir / "digest.json").string();
  write_file_atomic(art.digest_path, digest.dump(2) + "\n");
  return art;
}

}  // namespace

std::string episode_csv(const TrajectoryLog& log) {
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < log.state_dim; ++i) out << ",x" << i;
  for (int i = 0; i < log.input_dim; ++i) out << ",u" << i;
  for (int i = 0; i < log.state_dim; ++i) out << ",residual" << i;
  out << ",l_t,stage_cost,V_t,solver_iters,converged\n";
  for (const StepRecord& rec : log.steps) {
    out << rec.t;
    for (int i = 0; i < log.state_dim; ++i) out << "," << num(rec.x(i));
    for (int i = 0; i < log.input_dim; ++i) out << "," << num(rec.u(i));
    for (int i = 0; i < log.state_dim; ++i) out << "," << num(rec.residual(i));
    out << "," << num(rec.estimation_loss) << "," << num(rec.stage_cost) << ","
        << num(rec.objective) << "," << rec.solver_iters << ","
        << (rec.converged ? 1 : 0) << "\n";
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("write_file_atomic: cannot open '" + tmp + "'");
    }
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw std::runtime_error("write_file_atomic: write failed for '" + tmp +
                               "'");
    }
  }
  fs::rename(tmp, path);
}

RunArtifacts run_scenario(const ScenarioConfig& cfg, int workers) {
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(cfg.run.repeats));
  for (int r = 0; r < cfg.run.repeats; ++r) {
    Job job;
    job.kind = cfg.controller.kind;
    job.feature_count = cfg.controller.feature_count;
    job.lr = cfg.controller.learning_rate;
    job.repeat = r;
    job.seed = rng::derive(cfg.run.master_seed, cfg.name,
                           static_cast<std::uint64_t>(r));
    job.file_base = job_file_base(job);
    jobs.push_back(job);
  }
  return execute_jobs(cfg, jobs, workers);
}

RunArtifacts run_sweep(const ScenarioConfig& cfg, int workers) {
  if (!cfg.has_sweep) {
    throw std::invalid_argument("run_sweep: scenario has no sweep block");
  }
  std::vector<Job> jobs;
  for (int m : cfg.sweep.feature_counts) {
    for (double eta : cfg.sweep.learning_rates) {
      for (int r = 0; r < cfg.run.repeats; ++r) {
        Job job;
        job.kind = cfg.controller.kind;
        job.feature_count = m;
        job.lr = LearningRateSpec{cfg.controller.learning_rate.mode, eta};
        job.repeat = r;
        // Repeat seeds are independent of the grid point: every (M, eta)
        // cell replays the same noise and initial-state realizations.
        job.seed = rng::derive(cfg.run.master_seed, cfg.name,
                               static_cast<std::uint64_t>(r));
        job.file_base = job_file_base(job);
        jobs.push_back(job);
      }
    }
  }
  return execute_jobs(cfg, jobs, workers);
}

RegretArtifacts run_regret(const ScenarioConfig& cfg,
                           const std::vector<int>& horizons, int workers) {
  if (horizons.empty()) {
    throw std::invalid_argument("run_regret: need at least one horizon");
  }
  std::vector<int> hs = horizons;
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  if (hs.front() < 1) {
    throw std::invalid_argument("run_regret: horizons must be positive");
  }

  const int repeats = cfg.run.repeats;
  struct Cell {
    double alg_cost = 0.0, oracle_cost = 0.0, regret = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
  };
  std::vector<std::vector<Cell>> cells(
      hs.size(), std::vector<Cell>(static_cast<std::size_t>(repeats)));

  run_jobs(hs.size() * static_cast<std::size_t>(repeats), workers,
           [&](std::size_t idx) {
             const std::size_t hi = idx / static_cast<std::size_t>(repeats);
             const int r = static_cast<int>(idx % static_cast<std::size_t>(repeats));
             const std::uint64_t seed =
                 rng::derive(cfg.run.master_seed, cfg.name,
                             static_cast<std::uint64_t>(r));
             EpisodeConfig alg =
                 assemble_episode(cfg, seed, ControllerKind::ssi_mpc,
                                  cfg.controller.feature_count,
                                  cfg.controller.learning_rate);
             EpisodeConfig oracle =
                 assemble_episode(cfg, seed, ControllerKind::clairvoyant_mpc,
                                  cfg.controller.feature_count,
                                  cfg.controller.learning_rate);
             alg.t_steps = hs[hi];
             oracle.t_steps = hs[hi];
             auto [la, lo] = run_paired(alg, oracle);
             Cell& c = cells[hi][static_cast<std::size_t>(r)];
             c.seed = seed;
             c.failed = la.failed || lo.failed;
             c.alg_cost = la.cumulative_cost;
             c.oracle_cost = lo.cumulative_cost;
             if (!c.failed) {
               c.regret = dynamic_regret(la, lo).total;
             }
           });

  RegretArtifacts art;
  art.output_dir = cfg.run.output_dir;
  art.horizons = hs;
  const fs::path dir(cfg.run.output_dir);
  fs::create_directories(dir);

  std::string csv = "horizon,repeat,seed,alg_cost,oracle_cost,regret,failed\n";
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    std::vector<double> sample;
    for (int r = 0; r < repeats; ++r) {
      const Cell& c = cells[hi][static_cast<std::size_t>(r)];
      std::ostringstream row;
      row << hs[hi] << "," << r << "," << c.seed << "," << num(c.alg_cost)
          << "," << num(c.oracle_cost) << "," << num(c.regret) << ","
          << (c.failed ? 1 : 0) << "\n";
      csv += row.str();
      if (c.failed) {
        ++art.failures;
      } else {
        sample.push_back(c.regret);
      }
    }
    const double med =
        sample.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : median(sample);
    art.median_regret.push_back(med);
    art.median_regret_per_step.push_back(med / hs[hi]);
  }
  art.csv_path = (dir / "regret.csv").string();
  write_file_atomic(art.csv_path, csv);

  bool fit_ok = hs.size() >= 2;
  for (double m : art.median_regret) {
    if (!std::isfinite(m)) fit_ok = false;
  }
  if (fit_ok) {
    std::vector<double> xs(hs.begin(), hs.end());
    art.fit = sublinearity_slope(xs, art.median_regret);
  } else {
    art.fit.degenerate = true;
  }

  json summary;
  summary["scenario"] = cfg.name;
  summary["comparator"] = "clairvoyant_mpc (proxy benchmark)";
  summary["horizons"] = art.horizons;
  summary["median_regret"] = art.median_regret;
  summary["median_regret_per_step"] = art.median_regret_per_step;
  summary["slope"] = art.fit.slope;
  summary["intercept"] = art.fit.intercept;
  summary["degenerate"] = art.fit.degenerate;
  summary["failures"] = art.failures;
  art.summary_path = (dir / "regret_summary.json").string();
  write_file_atomic(art.summary_path, summary.dump(2) + "\n");
  return art;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

bool read_table(const std::string& path, Table& table) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return true;
}

double cell_num(const std::vector<std::string>& row, int col) {
  return std::strtod(row[static_cast<std::size_t>(col)].c_str(), nullptr);
}

const char* kPalette[] = {"#1f6fb2", "#d95f02", "#2b9e4e", "#b03a9a",
                          "#8a6d1a", "#3b3b9e", "#c23b3b", "#2d8a8a"};

std::vector<std::string> sorted_episode_files(const fs::path& dir) {
  std::vector<std::string> files;
  const fs::path episodes = dir / "episodes";
  if (fs::exists(episodes)) {
    for (const auto& entry : fs::directory_iterator(episodes)) {
      if (entry.path().extension() == ".csv") {
        files.push_back(entry.path().string());
      }
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Per-step series from up to eight episode CSVs; value(row) extracts the
/// plotted quantity.
bool time_series_plot(
    const fs::path& dir, const std::string& title, const std::string& y_label,
    const std::function<double(const Table&, const std::vector<std::string>&)>&
        value,
    PlotSpec& spec) {
  const std::vector<std::string> files = sorted_episode_files(dir);
  std::size_t used = 0;
  for (const std::string& file : files) {
    if (used >= 8) break;
    Table t;
    if (!read_table(file, t) || t.rows.empty()) continue;
    const int tc = t.col("t");
    if (tc < 0) continue;
    PlotSeries s;
    s.label = fs::path(file).stem().string();
    s.color = kPalette[used % 8];
    for (const auto& row : t.rows) {
      s.x.push_back(cell_num(row, tc));
      s.y.push_back(value(t, row));
    }
    spec.series.push_back(std::move(s));
    ++used;
  }
  spec.title = title;
  spec.x_label = "step";
  spec.y_label = y_label;
  return used > 0;
}

double state_norm(const Table& t, const std::vector<std::string>& row) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    const std::string& h = t.header[i];
    if (h.size() >= 2 && h[0] == 'x' &&
        h.find_first_not_of("0123456789", 1) == std::string::npos) {
      const double v = cell_num(row, static_cast<int>(i));
      acc += v * v;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& artifacts_dir,
                                    const std::vector<std::string>& kinds) {
  const fs::path dir(artifacts_dir);
  if (!fs::exists(dir)) {
    throw std::invalid_argument("emit_plots: no such directory: " +
                                artifacts_dir);
  }
  fs::create_directories(dir / "plots");
  std::vector<std::string> written;
  std::string digest;

  for (const std::string& kind : kinds) {
    PlotSpec spec;
    bool have = false;
    if (kind == "error") {
      have = time_series_plot(dir, "State error over time", "||x||",
                              state_norm, spec);
    } else if (kind == "prediction_error") {
      have = time_series_plot(
          dir, "One-step prediction error over time", "l_t",
          [](const Table& t, const std::vector<std::string>& row) {
            const int c = t.col("l_t");
            return c < 0 ? std::numeric_limits<double>::quiet_NaN()
                         : cell_num(row, c);
          },
          spec);
    } else if (kind == "cumulative") {
      Table t;
      if (read_table((dir / "summary.csv").string(), t) && !t.rows.empty()) {
        const int cm = t.col("feature_count");
        const int ce = t.col("learning_rate");
        const int cv = t.col("cumulative_state_sq");
        const int cf = t.col("failed");
        if (cm >= 0 && ce >= 0 && cv >= 0 && cf >= 0) {
          // One series per learning rate: median cumulative error vs M.
          std::vector<std::string> etas;
          for (const auto& row : t.rows) {
            const std::string& e = row[static_cast<std::size_t>(ce)];
            if (std::find(etas.begin(), etas.end(), e) == etas.end()) {
              etas.push_back(e);
            }
          }
          std::size_t color = 0;
          for (const std::string& eta : etas) {
            std::vector<double> ms;
            for (const auto& row : t.rows) {
              if (row[static_cast<std::size_t>(ce)] != eta) continue;
              const double m = cell_num(row, cm);
              if (std::find(ms.begin(), ms.end(), m) == ms.end()) {
                ms.push_back(m);
              }
            }
            std::sort(ms.begin(), ms.end());
            PlotSeries s;
            s.label = "eta=" + eta;
            s.color = kPalette[color++ % 8];
            for (double m : ms) {
              std::vector<double> sample;
              for (const auto& row : t.rows) {
                if (row[static_cast<std::size_t>(ce)] == eta &&
                    cell_num(row, cm) == m && cell_num(row, cf) == 0.0) {
                  sample.push_back(cell_num(row, cv));
                }
              }
              if (!sample.empty()) {
                s.x.push_back(m);
                s.y.push_back(median(sample));
              }
            }
            if (!s.x.empty()) {
              spec.series.push_back(std::move(s));
              have = true;
            }
          }
        }
      }
      spec.title = "Cumulative state error vs feature count";
      spec.x_label = "feature count M";
      spec.y_label = "cumulative ||x||^2";
    } else if (kind == "regret") {
      Table t;
      if (read_table((dir / "regret.csv").string(), t) && !t.rows.empty()) {
        const int ch = t.col("horizon");
        const int cr = t.col("regret");
        const int cf = t.col("failed");
        if (ch >= 0 && cr >= 0 && cf >= 0) {
          std::vector<double> hs;
          for (const auto& row : t.rows) {
            const double h = cell_num(row, ch);
            if (std::find(hs.begin(), hs.end(), h) == hs.end()) {
              hs.push_back(h);
            }
          }
          std::sort(hs.begin(), hs.end());
          PlotSeries med;
          med.label = "median gap vs clairvoyant";
          med.color = kPalette[0];
          for (double h : hs) {
            std::vector<double> sample;
            for (const auto& row : t.rows) {
              if (cell_num(row, ch) == h && cell_num(row, cf) == 0.0) {
                sample.push_back(cell_num(row, cr));
              }
            }
            if (!sample.empty()) {
              med.x.push_back(h);
              med.y.push_back(median(sample));
            }
          }
          if (med.x.size() >= 2) {
            SlopeFit fit = sublinearity_slope(med.x, med.y);
            PlotSeries line;
            line.label = "power-law fit";
            line.color = kPalette[1];
            for (double h : {med.x.front(), med.x.back()}) {
              line.x.push_back(h);
              line.y.push_back(
                  std::exp(fit.intercept + fit.slope * std::log(h)));
            }
            char note[80];
            std::snprintf(note, sizeof(note), "fitted exponent p = %.3g%s",
                          fit.slope,
                          fit.degenerate ? " (degenerate values clamped)" : "");
            spec.annotations.push_back(note);
            spec.series.push_back(std::move(med));
            spec.series.push_back(std::move(line));
            have = true;
          } else if (!med.x.empty()) {
            spec.series.push_back(std::move(med));
            have = true;
          }
        }
      }
      spec.title = "Regret proxy vs horizon";
      spec.x_label = "horizon T (steps)";
      spec.y_label = "cumulative cost gap";
      spec.log_x = true;
      spec.log_y = true;
    } else {
      throw std::invalid_argument("emit_plots: unknown plot kind '" + kind +
                                  "'");
    }

    if (!have) {
      digest += "skipped " + kind + ": no data\n";
      continue;
    }
    const std::string path = (dir / "plots" / ("plot_" + kind + ".svg")).string();
    write_file_atomic(path, render_plot(spec));
    written.push_back(path);
    digest += "emitted " + path + "\n";
  }

  write_file_atomic((dir / "plots" / "plots_digest.txt").string(), digest);
  return written;
}

}  // namespace ssimpc
