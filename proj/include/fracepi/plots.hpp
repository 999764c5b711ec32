#pragma once

// Self-contained matplotlib scripts that redraw figures from run CSVs.
// Scripts live in <run>/plots/ and read their inputs from <run>/.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "fracepi/artifacts.hpp"
#include "fracepi/error.hpp"

namespace fracepi {

struct FigureScript {
  std::string name;                 // script file name
  std::vector<std::string> inputs;  // CSVs it reads
  std::string body;                 // python after the shared preamble
};

inline const std::vector<FigureScript>& figure_scripts() {
  static const std::vector<FigureScript> figs = {
      {"trajectory.py", {"trajectory.csv"}, R"PY(
d = load("trajectory.csv")
names = [k for k in d if k != "t"]
fig, axes = plt.subplots(len(names), 1, figsize=(7, 2.2 * len(names)), sharex=True)
for ax, name in zip(axes, names):
    ax.plot(d["t"], d[name])
    ax.set_ylabel(name)
axes[-1].set_xlabel("t (years)")
save(fig, "trajectory.png")
)PY"},
      {"fit.py", {"fit_series.csv"}, R"PY(
d = load("fit_series.csv")
fig, ax = plt.subplots(figsize=(8, 4))
ax.plot(d["index"], d["cases"], "o", ms=3, label="observed")
ax.plot(d["index"], d["model"], "-", label="model")
ax.set_xticks(d["index"][::3])
ax.set_xticklabels(d["month"][::3], rotation=45, ha="right")
ax.set_ylabel("cases per month")
ax.legend()
save(fig, "fit.png")
)PY"},
      {"states.py", {"focp.csv"}, R"PY(
d = load("focp.csv")
fig, axes = plt.subplots(2, 2, figsize=(10, 7))
for ax, name in zip(axes.flat, ["S", "E", "I", "R"]):
    ax.plot(d["t"], d[name])
    ax.set_title(name)
    ax.set_xlabel("t (years)")
save(fig, "states.png")
)PY"},
      {"costates.py", {"focp.csv"}, R"PY(
d = load("focp.csv")
fig, ax = plt.subplots(figsize=(7, 4))
for name in ["p1", "p2", "p3", "p4"]:
    ax.plot(d["t"], d[name], label=name)
ax.set_xlabel("t (years)")
ax.legend()
save(fig, "costates.png")
)PY"},
      {"control.py", {"focp.csv"}, R"PY(
d = load("focp.csv")
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(d["t"], d["T"])
ax.set_xlabel("t (years)")
ax.set_ylabel("treatment T(t)")
save(fig, "control.png")
)PY"},
      {"efficacy.py", {"efficacy.csv"}, R"PY(
d = load("efficacy.csv")
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(d["t"], d["F"])
ax.axhline(0.0, color="grey", lw=0.5)
ax.set_xlabel("t (years)")
ax.set_ylabel("F(t)")
save(fig, "efficacy.png")
)PY"},
      {"sensitivity_kappa2.py", {"sensitivity_kappa2.csv"}, R"PY(
d = load("sensitivity_kappa2.csv")
fig, ax = plt.subplots(figsize=(7, 4))
for name in [k for k in d if k != "t"]:
    ax.plot(d["t"], d[name], label=name)
ax.set_xlabel("t (years)")
ax.set_ylabel("F(t)")
ax.legend()
save(fig, "sensitivity_kappa2.png")
)PY"},
      {"sensitivity_kappa1.py", {"sensitivity_kappa1.csv"}, R"PY(
d = load("sensitivity_kappa1.csv")
fig, ax = plt.subplots(figsize=(7, 4))
for name in [k for k in d if k != "t"]:
    ax.plot(d["t"], d[name], label=name)
ax.set_xlabel("t (years)")
ax.set_ylabel("F(t)")
ax.legend()
save(fig, "sensitivity_kappa1.png")
)PY"},
  };
  return figs;
}

inline constexpr std::string_view kPlotPreamble = R"PY(import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
RUN = os.path.dirname(HERE)


def _value(text):
    try:
        return float(text)
    except ValueError:
        return text


def load(name):
    with open(os.path.join(RUN, name), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: [_value(r[key]) for r in rows] for key in rows[0]}


def save(fig, name):
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, name), dpi=150)
)PY";

class MissingArtifacts : public Error {
 public:
  explicit MissingArtifacts(const std::vector<std::string>& missing) : Error(describe(missing)), missing_(missing) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& missing) {
    std::string s = "no plottable artifacts; missing:";
    for (const auto& m : missing) s += " " + m;
    return s;
  }
  std::vector<std::string> missing_;
};

/// Writes one script per figure whose inputs exist in the run directory.
/// Throws MissingArtifacts listing every expected CSV when none do.
inline std::vector<std::string> emit_plots(ArtifactWriter& writer) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  std::set<std::string> missing;
  for (const auto& fig : figure_scripts()) {
    bool ok = true;
    for (const auto& in : fig.inputs)
      if (!fs::is_regular_file(writer.dir() / in)) {
        ok = false;
        missing.insert(in);
      }
    if (!ok) continue;
    writer.write("plots/" + fig.name, std::string(kPlotPreamble) + fig.body);
    written.push_back(fig.name);
  }
  if (written.empty()) throw MissingArtifacts({missing.begin(), missing.end()});
  return written;
}

}  // namespace fracepi
