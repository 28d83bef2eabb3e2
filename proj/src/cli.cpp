#include "qlim/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlim/estimation.hpp"
#include "qlim/fisher.hpp"
#include "qlim/scenario_io.hpp"
#include "qlim/synthesis.hpp"

namespace qlim {

namespace {

using nlohmann::json;

const std::map<std::string, Command>& command_names() {
  static const std::map<std::string, Command> names{
      {"qfi", Command::Qfi},           {"cfi", Command::Cfi},           {"design", Command::Design},
      {"saturate", Command::Saturate}, {"qfimatrix", Command::QfiMatrix}, {"simulate", Command::Simulate}};
  return names;
}

std::string command_name(Command c) {
  for (const auto& [name, value] : command_names())
    if (value == c) return name;
  return "?";
}

Parameter parse_direction(const std::string& text, std::size_t num_sources) {
  if (text.find(',') == std::string::npos && !text.empty() && !std::isdigit(static_cast<unsigned char>(text[0])) &&
      text[0] != '-' && text[0] != '.')
    return preset_parameter(text, num_sources);
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("direction component '" + item + "' is not a number");
    }
  }
  if (values.size() != 3 * num_sources)
    throw ValidationError("direction needs " + std::to_string(3 * num_sources) + " components");
  const Eigen::VectorXd a = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return Parameter::along(GeneralizedCoordinate::normalized(a), "custom");
}

Interferometer resolve_interferometer(const std::string& spec, const Scenario& sc, const Parameter& parameter) {
  const auto n = static_cast<Eigen::Index>(sc.num_collectors());
  if (spec == "optimal") return design_interferometer(sc, parameter);
  if (spec == "identity" || spec == "qft") return builtin_interferometer(spec, n);
  if (spec.rfind("bs_phase", 0) == 0) {
    double alpha = 0.0;
    if (spec.size() > 8) {
      if (spec[8] != ':') throw ValidationError("bs_phase takes its phase as bs_phase:<alpha>");
      try {
        alpha = std::stod(spec.substr(9));
      } catch (const std::exception&) {
        throw ValidationError("bad bs_phase angle in '" + spec + "'");
      }
    }
    return builtin_interferometer("bs_phase", n, alpha);
  }
  std::ifstream in(spec);
  if (!in) throw ValidationError("unknown interferometer '" + spec + "' (not a builtin or readable file)");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("interferometer file is not valid JSON: " + std::string(e.what()));
  }
  auto r = interferometer_from_json(doc);
  if (r.size() != n) throw ValidationError("interferometer size does not match collector count");
  return r;
}

json steps_json(const std::vector<StepEstimate>& steps, const std::vector<double>& extrapolants, double factor) {
  json out = json::array();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    json row{{"step", steps[i].step}, {"estimate", steps[i].estimate * factor}};
    if (i < extrapolants.size()) {
      row["extrapolated"] = extrapolants[i] * factor;
      if (i > 0) row["residual"] = std::abs(extrapolants[i] - extrapolants[i - 1]) * factor;
    }
    out.push_back(row);
  }
  return out;
}

json direction_json(const Parameter& p) {
  return {{"name", p.name},
          {"coordinate", std::vector<double>(p.coordinate.direction().data(),
                                             p.coordinate.direction().data() + p.coordinate.direction().size())},
          {"scale", p.scale}};
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json matrix_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

struct Emitter {
  const RunConfig& cfg;
  std::ostream& out;

  void json_doc(const json& doc) const {
    if (cfg.output_path.empty()) {
      out << doc.dump(2) << '\n';
      return;
    }
    std::ofstream f(cfg.output_path);
    if (!f) throw ValidationError("cannot write " + cfg.output_path);
    f << doc.dump(2) << '\n';
  }

  void gnuplot(const std::vector<std::vector<double>>& rows, const std::string& header) const {
    if (cfg.gnuplot_path.empty()) return;
    std::ofstream f(cfg.gnuplot_path);
    if (!f) throw ValidationError("cannot write " + cfg.gnuplot_path);
    f << "# " << header << '\n';
    f.precision(17);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) f << (i ? " " : "") << r[i];
      f << '\n';
    }
  }
};

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.scenario_path.empty()) throw ValidationError("--scenario is required");
  const Scenario sc = load_scenario(cfg.scenario_path);
  json doc{{"command", command_name(cfg.command)}, {"scenario_digest", scenario_digest(sc)}, {"scenario", to_json(sc)}};
  json warnings = json::array();
  if (sc.mode == Mode::Paraxial && paraxial_ratio(sc) > 0.1) {
    const std::string w = "paraxial approximation questionable: max source offset / z0 = " +
                          std::to_string(paraxial_ratio(sc));
    err << "warning: " << w << '\n';
    warnings.push_back(w);
  }
  doc["warnings"] = warnings;
  const Emitter emit{cfg, out};

  if (cfg.command == Command::QfiMatrix) {
    const auto rep = qfi_matrix_consistency(sc, qfi_target_from_string(cfg.target));
    doc["target"] = to_string(rep.target);
    doc["closed_form"] = matrix_json(rep.closed_form);
    doc["finite_difference"] = matrix_json(rep.finite_difference);
    doc["relative_error"] = matrix_json(rep.relative_error);
    doc["max_relative_error"] = rep.max_relative_error;
    doc["convergence"] = {{"converged", rep.converged}};
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 3; ++i)
      rows.push_back({rep.closed_form(i, 0), rep.closed_form(i, 1), rep.closed_form(i, 2), rep.finite_difference(i, 0),
                      rep.finite_difference(i, 1), rep.finite_difference(i, 2)});
    emit.gnuplot(rows, "closed_form[3] finite_difference[3]");
    emit.json_doc(doc);
    return rep.converged ? kExitOk : kExitNumerical;
  }

  const Parameter parameter = parse_direction(cfg.direction, sc.num_sources());
  doc["direction"] = direction_json(parameter);
  double factor = 1.0;
  if (cfg.angular) {
    const Eigen::VectorXd d = parameter.displacement();
    for (Eigen::Index i = 2; i < d.size(); i += 3)
      if (d(i) != 0.0) throw ValidationError("--angular applies to transverse directions only");
    factor = sc.z0 * sc.z0;
    doc["units"] = "angular";
  }

  auto fill_fisher = [&](const FisherReport& rep) {
    doc["qfi"] = rep.qfi * factor;
    json conv{{"steps", steps_json(rep.step_sequence, rep.extrapolants, factor)}, {"converged", rep.converged}};
    if (rep.cfi) {
      doc["cfi"] = rep.cfi_diverging ? json("diverging") : json(*rep.cfi * factor);
      doc["cfi_diverging"] = rep.cfi_diverging;
      if (rep.saturation_ratio) doc["saturation_ratio"] = *rep.saturation_ratio;
      doc["probabilities"] = to_vector(rep.probabilities);
      conv["cfi_steps"] = steps_json(rep.cfi_step_sequence, rep.cfi_extrapolants, factor);
    }
    doc["convergence"] = conv;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.step_sequence.size(); ++i)
      rows.push_back({rep.step_sequence[i].step, rep.step_sequence[i].estimate * factor,
                      i < rep.extrapolants.size() ? rep.extrapolants[i] * factor : NAN});
    emit.gnuplot(rows, "step qfi_estimate qfi_extrapolated");
  };

  switch (cfg.command) {
    case Command::Qfi: {
      const auto rep = qfi(sc, parameter);
      fill_fisher(rep);
      emit.json_doc(doc);
      return rep.converged ? kExitOk : kExitNumerical;
    }
    case Command::Cfi:
    case Command::Design: {
      const std::string spec = cfg.command == Command::Design ? "optimal" : cfg.interferometer;
      const auto r = resolve_interferometer(spec, sc, parameter);
      const auto rep = cfi(sc, parameter, r);
      fill_fisher(rep);
      doc["interferometer"] = to_json(r);
      if (cfg.command == Command::Design) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index q = 0; q < rep.probabilities.size(); ++q)
          rows.push_back({static_cast<double>(q), rep.probabilities(q)});
        emit.gnuplot(rows, "output_mode probability");
      }
      emit.json_doc(doc);
      return rep.converged ? kExitOk : kExitNumerical;
    }
    case Command::Saturate: {
      const auto rep = verify_saturation(sc, parameter, cfg.step);
      fill_fisher(rep.fisher);
      doc["step"] = rep.step;
      doc["saturation_ratio"] = rep.saturation_ratio;
      doc["quantum_fidelity"] = rep.quantum_fidelity;
      doc["classical_fidelity"] = rep.classical_fidelity;
      doc["fidelity_gap"] = rep.fidelity_gap;
      doc["unitarity_defect"] = rep.unitarity_defect;
      doc["triangular"] = {{"below_diagonal_RA", rep.triangular.below_diagonal_RA},
                           {"above_diagonal_RB", rep.triangular.above_diagonal_RB},
                           {"singular_value_mismatch", rep.triangular.singular_value_mismatch},
                           {"scalar_product_residual", rep.triangular.scalar_product_residual},
                           {"fidelity_gap", rep.triangular.fidelity_gap},
                           {"pivots", rep.triangular.pivots}};
      doc["interferometer"] = to_json(rep.local_R);
      doc["pair_interferometer"] = to_json(rep.pair_R);
      doc["failures"] = rep.failures;
      doc["passed"] = rep.passed();
      emit.json_doc(doc);
      for (const auto& f : rep.failures) err << "saturation check failed: " << f << '\n';
      return rep.passed() && rep.fisher.converged ? kExitOk : kExitNumerical;
    }
    case Command::Simulate: {
      const auto r = resolve_interferometer(cfg.interferometer, sc, parameter);
      const auto sweep = crb_sweep(sc, parameter, r, cfg.n_photons, cfg.trials, cfg.seed, cfg.threads, cfg.theta, cfg.theta);
      doc["seed"] = cfg.seed;
      doc["interferometer"] = to_json(r);
      doc["aggregate"] = to_json(sweep);
      doc["cfi"] = sweep.cfi;
      doc["qfi"] = sweep.qfi;
      if (!cfg.csv_path.empty()) {
        std::ofstream f(cfg.csv_path);
        if (!f) throw ValidationError("cannot write " + cfg.csv_path);
        write_trials_csv(f, sweep);
      }
      std::vector<std::vector<double>> rows;
      for (const auto& t : sweep.trials) rows.push_back({static_cast<double>(t.trial), t.theta_hat});
      emit.gnuplot(rows, "trial theta_hat");
      emit.json_doc(doc);
      return kExitOk;
    }
    case Command::QfiMatrix: break;
  }
  return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    return execute(cfg, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum and classical Fisher information for incoherent point sources seen through collector arrays"};
  RunConfig cfg;
  std::string command;
  std::vector<std::string> names;
  for (const auto& [name, value] : command_names()) names.push_back(name);
  app.add_option("command", command, "qfi | cfi | design | saturate | qfimatrix | simulate")
      ->required()
      ->check(CLI::IsMember(names));
  app.add_option("--scenario", cfg.scenario_path, "scenario file")->required();
  app.add_option("--direction", cfg.direction, "preset (separation-x, centroid-z, source1-y, ...) or comma list");
  app.add_option("--interferometer", cfg.interferometer, "identity | qft | bs_phase[:alpha] | optimal | JSON file");
  app.add_option("--out", cfg.output_path, "JSON result file (default stdout)");
  app.add_option("--csv", cfg.csv_path, "per-trial CSV for simulate");
  app.add_option("--gnuplot-dat", cfg.gnuplot_path, "plain columnar data file");
  app.add_option("--target", cfg.target, "qfimatrix target: single | separation | centroid");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--photons", cfg.n_photons, "photons per trial")->check(CLI::PositiveNumber);
  app.add_option("--trials", cfg.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--threads", cfg.threads, "worker threads for simulate")->check(CLI::PositiveNumber);
  app.add_option("--step", cfg.step, "displacement used by saturate");
  app.add_option("--theta", cfg.theta, "true parameter offset for simulate");
  app.add_flag("--angular", cfg.angular, "report transverse information per squared angle (times z0^2)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  cfg.command = command_names().at(command);
  return run(cfg, out, err);
}

}  // namespace qlim
