// Copyright 2026 The ustruct authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ustruct/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "ustruct/equivalence.hpp"
#include "ustruct/fixtures.hpp"
#include "ustruct/matrix_io.hpp"
#include "ustruct/protocol.hpp"
#include "ustruct/ranks.hpp"

namespace ustruct {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitContract = 3;
constexpr int kExitAnomaly = 4;

void emit_report(const json& report) {
  std::cout << "--- report (json) ---\n" << report.dump(2) << "\n";
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_matrix_doc(const Matrix& m, const std::string& path,
                      const json& extra = json::object()) {
  json doc = extra;
  doc["matrix"] = matrix_json(m);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << doc.dump(2) << "\n";
}

BipartiteUnitary load_unitary(const std::string& path, const Tolerance& tol) {
  const MatrixFile file = load_matrix_file(path);
  return BipartiteUnitary::checked(file.d_a, file.d_b, file.matrix, tol);
}

PureState make_protocol_input(const BipartiteUnitary& u,
                              const std::string& input_spec,
                              std::uint64_t seed) {
  if (input_spec == "random") {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    Vector a = random_state_vector(u.d_a, rng);
    Vector b = random_state_vector(u.d_b, rng);
    return PureState::product(PureState({{"A", u.d_a}}, a),
                              PureState({{"B", u.d_b}}, b));
  }
  return load_state_file(input_spec);
}

json transcript_json(const ProtocolTranscript& t) {
  json rounds = json::array();
  for (const ProtocolRound& r : t.rounds) {
    rounds.push_back({{"measuring_party", r.measuring_party},
                      {"outcome", r.outcome},
                      {"message", r.message},
                      {"correction", r.correction}});
  }
  return {{"protocol", protocol_name(t.protocol)},
          {"resource_rank", t.resource_rank},
          {"ebits", t.ebits},
          {"rounds", rounds},
          {"process_fidelity", t.process_fidelity},
          {"branches_checked", t.branches_checked},
          {"exhaustive", t.exhaustive}};
}

void print_transcript(const ProtocolTranscript& t) {
  std::cout << "protocol:       " << protocol_name(t.protocol) << "\n"
            << "resource rank:  " << t.resource_rank << "\n"
            << "ebits:          " << t.ebits << "\n"
            << "fidelity:       " << t.process_fidelity << " ("
            << t.branches_checked << (t.exhaustive ? " exhaustive" : " sampled")
            << " branches)\n";
  for (const ProtocolRound& r : t.rounds) {
    std::cout << "round:          party " << r.measuring_party << " measured "
              << r.outcome << ", sent " << r.message << ", correction: "
              << r.correction << "\n";
  }
}

int cmd_schmidt(const std::string& path, const Tolerance& tol,
                const std::string& out_dir) {
  const BipartiteUnitary u = load_unitary(path, tol);
  const SchmidtDecomposition sd =
      schmidt_decompose(u.matrix, u.d_a, u.d_b, tol);
  const double residual = (sd.reconstruct() - u.matrix).norm();

  std::cout << "operator:      " << path << " (" << u.d_a << "x" << u.d_b
            << ")\n"
            << "schmidt rank:  " << sd.rank() << "\n"
            << "coefficients: ";
  for (int i = 0; i < sd.rank(); ++i) std::cout << " " << sd.coefficients(i);
  std::cout << "\nresidual:      " << residual << "\n";

  json report = {{"command", "schmidt"},
                 {"d_A", u.d_a},
                 {"d_B", u.d_b},
                 {"rank", sd.rank()},
                 {"coefficients", json::array()},
                 {"reconstruction_residual", residual}};
  for (int i = 0; i < sd.rank(); ++i) {
    report["coefficients"].push_back(sd.coefficients(i));
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < sd.rank(); ++i) {
      write_matrix_doc(sd.a_ops[i],
                       out_dir + "/a_op_" + std::to_string(i) + ".json");
      write_matrix_doc(sd.b_ops[i],
                       out_dir + "/b_op_" + std::to_string(i) + ".json");
    }
    report["factors_written_to"] = out_dir;
  }
  emit_report(report);
  return kExitOk;
}

json side_detection(const BipartiteUnitary& u, Side side, const Tolerance& tol,
                    std::uint64_t seed) {
  const ControlledCheck check = check_controlled(u, side, tol);
  json entry = {{"side", side_name(side)},
                {"controlled", check.is_controlled},
                {"criterion_residual", check.max_residual}};
  std::cout << "side " << side_name(side) << ": controlled="
            << (check.is_controlled ? "true" : "false")
            << " (criterion residual " << check.max_residual << ")";
  if (check.is_controlled) {
    const ControlledForm cf = extract_controlled_form(u, side, tol, seed);
    entry["groups"] = cf.group_count();
    entry["extraction_residual"] = (cf.reconstruct() - u.matrix).norm();
    std::cout << ", groups=" << cf.group_count();
  }
  const auto bs = finest_block_structure(u, side, tol, seed + 1);
  if (bs.has_value()) {
    entry["block_sizes"] = bs->block_sizes;
    std::cout << ", blocks=(";
    for (size_t i = 0; i < bs->block_sizes.size(); ++i) {
      std::cout << (i ? "," : "") << bs->block_sizes[i];
    }
    std::cout << ")";
  } else {
    entry["block_sizes"] = nullptr;
    std::cout << ", blocks=none";
  }
  std::cout << "\n";
  return entry;
}

int cmd_detect(const std::string& path, const std::string& side,
               const Tolerance& tol, std::uint64_t seed) {
  const BipartiteUnitary u = load_unitary(path, tol);
  std::cout << "operator: " << path << " (" << u.d_a << "x" << u.d_b
            << ")\n";
  json sides = json::array();
  if (side == "A" || side == "both") {
    sides.push_back(side_detection(u, Side::A, tol, seed));
  }
  if (side == "B" || side == "both") {
    sides.push_back(side_detection(u, Side::B, tol, seed + 17));
  }
  emit_report({{"command", "detect"},
               {"d_A", u.d_a},
               {"d_B", u.d_b},
               {"schmidt_rank", schmidt_rank(u.matrix, u.d_a, u.d_b, tol)},
               {"sides", sides}});
  return kExitOk;
}

int cmd_decompose(const std::string& path, const std::string& side_str,
                  const Tolerance& tol, std::uint64_t seed,
                  const std::string& out_dir) {
  const BipartiteUnitary u = load_unitary(path, tol);
  const Side side = (side_str == "A") ? Side::A : Side::B;
  const ControlledForm cf = extract_controlled_form(u, side, tol, seed);
  const double residual = (cf.reconstruct() - u.matrix).norm();

  std::cout << "controlled from side " << side_name(side) << " with "
            << cf.group_count() << " groups\n";
  json groups = json::array();
  for (const ControlledGroup& g : cf.groups) {
    json indices = json::array();
    std::cout << "group {";
    for (size_t i = 0; i < g.indices.size(); ++i) {
      std::cout << (i ? "," : "") << g.indices[i];
      indices.push_back(g.indices[i]);
    }
    std::cout << "}\n";
    groups.push_back({{"indices", indices}});
  }
  std::cout << "reconstruction residual: " << residual << "\n";

  json report = {{"command", "decompose"},
                 {"side", side_name(side)},
                 {"groups", groups},
                 {"reconstruction_residual", residual}};
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_matrix_doc(cf.q, out_dir + "/q.json");
    write_matrix_doc(cf.r, out_dir + "/r.json");
    for (int g = 0; g < cf.group_count(); ++g) {
      json extra;
      extra["indices"] = json::array();
      for (int k : cf.groups[g].indices) extra["indices"].push_back(k);
      write_matrix_doc(cf.groups[g].v,
                       out_dir + "/group_" + std::to_string(g) + ".json",
                       extra);
    }
    report["written_to"] = out_dir;
  }
  emit_report(report);
  return kExitOk;
}

int cmd_sl2lu(const std::string& path_u, const std::string& path_v,
              const std::string& witness_path, const Tolerance& tol) {
  const Matrix u = load_square_matrix(path_u);
  const Matrix v = load_square_matrix(path_v);
  const SLWitness witness = load_witness_file(witness_path);
  const LocalEquivalenceWitness lu = sl_to_lu(u, v, witness, tol);

  std::cout << "parties:           " << witness.parties() << "\n"
            << "residual:          " << lu.residual << "\n"
            << "internal residual: " << lu.internal_residual << "\n";
  json q_list = json::array(), r_list = json::array();
  for (const Matrix& q : lu.q_ops) q_list.push_back(matrix_json(q));
  for (const Matrix& r : lu.r_ops) r_list.push_back(matrix_json(r));
  emit_report({{"command", "sl2lu"},
               {"parties", witness.parties()},
               {"residual", lu.residual},
               {"internal_residual", lu.internal_residual},
               {"q_ops", q_list},
               {"r_ops", r_list}});
  return kExitOk;
}

int cmd_protocol(const std::string& path, const std::string& input_spec,
                 const std::string& protocol_choice, const Tolerance& tol,
                 std::uint64_t seed) {
  const BipartiteUnitary u = load_unitary(path, tol);
  const PureState input = make_protocol_input(u, input_spec, seed);

  auto cheapest_controlled = [&]() -> std::optional<ControlledForm> {
    std::optional<ControlledForm> best;
    for (Side side : {Side::A, Side::B}) {
      if (check_controlled(u, side, tol).is_controlled) {
        ControlledForm cf = extract_controlled_form(u, side, tol, seed);
        if (!best || cf.group_count() < best->group_count()) {
          best = std::move(cf);
        }
      }
    }
    return best;
  };

  ProtocolRun run;
  if (protocol_choice == "teleport") {
    run = simulate_teleport_protocol(u, input, seed);
  } else if (protocol_choice == "controlled") {
    const auto cf = cheapest_controlled();
    if (!cf) {
      throw NoSimultaneousSVD("operator is not controlled from either side");
    }
    run = simulate_controlled_protocol(*cf, input, seed);
  } else {  // auto
    const int rank = schmidt_rank(u.matrix, u.d_a, u.d_b, tol);
    if (rank == 3 && (u.d_a == 2 || u.d_a == 3) && u.d_a <= u.d_b) {
      run = implement_schmidt_rank3(u, input, tol, seed);
    } else {
      const auto cf = cheapest_controlled();
      if (cf && cf->group_count() <= u.d_a * u.d_a) {
        run = simulate_controlled_protocol(*cf, input, seed);
      } else {
        run = simulate_teleport_protocol(u, input, seed);
      }
    }
  }

  print_transcript(run.transcript);
  emit_report({{"command", "protocol"},
               {"input", input_spec},
               {"transcript", transcript_json(run.transcript)}});
  return kExitOk;
}

int cmd_rankcheck(const std::vector<std::string>& files, bool random_mode,
                  int k, int trials, int min_size, int max_size,
                  const Tolerance& tol, std::uint64_t seed) {
  json reports = json::array();
  int violations = 0;

  if (random_mode) {
    Rng rng(seed);
    std::uniform_int_distribution<int> size(min_size, max_size);
    for (int t = 0; t < trials; ++t) {
      KroneckerSum ks;
      const int m1 = size(rng), n1 = size(rng), m2 = size(rng),
                n2 = size(rng);
      for (int i = 0; i < k; ++i) {
        ks.r_ops.push_back(random_gaussian(m1, n1, rng));
        ks.s_ops.push_back(random_gaussian(m2, n2, rng));
      }
      const RankInequalityReport rep = check_rank_inequality(ks, tol);
      std::cout << "trial " << t << ": K=" << k << " shapes " << m1 << "x"
                << n1 << ", " << m2 << "x" << n2 << " lhs=" << rep.lhs_rank
                << " rhs=" << rep.rhs_rank
                << (rep.holds ? " holds" : " VIOLATION") << "\n";
      reports.push_back({{"trial", t},
                         {"k", k},
                         {"lhs_rank", rep.lhs_rank},
                         {"rhs_rank", rep.rhs_rank},
                         {"swapped_rank", rep.swapped_rank},
                         {"holds", rep.holds},
                         {"lhs_gap", {rep.lhs_gap_above, rep.lhs_gap_below}},
                         {"rhs_gap", {rep.rhs_gap_above, rep.rhs_gap_below}}});
      if (!rep.holds) ++violations;
    }
  }

  for (const std::string& path : files) {
    const MatrixFile file = load_matrix_file(path);
    const SchmidtDecomposition sd =
        schmidt_decompose(file.matrix, file.d_a, file.d_b, tol);
    KroneckerSum ks;
    for (int j = 0; j < sd.rank(); ++j) {
      ks.r_ops.push_back(sd.coefficients(j) * sd.a_ops[j]);
      ks.s_ops.push_back(sd.b_ops[j]);
    }
    const RankInequalityReport rep = check_rank_inequality(ks, tol);
    std::cout << path << ": K=" << rep.k << " lhs=" << rep.lhs_rank
              << " rhs=" << rep.rhs_rank
              << (rep.holds ? " holds" : " VIOLATION") << "\n";
    json entry = {{"file", path},
                  {"k", rep.k},
                  {"lhs_rank", rep.lhs_rank},
                  {"rhs_rank", rep.rhs_rank},
                  {"holds", rep.holds}};
    if (!rep.holds) ++violations;
    if (is_unitary(file.matrix, tol) && file.d_a <= 3 && sd.rank() <= 3) {
      const BipartiteUnitary u =
          BipartiteUnitary::checked(file.d_a, file.d_b, file.matrix, tol);
      const Rank3UnitaryReport rv =
          verify_rank3_unitary_equality(u, tol, seed);
      std::cout << "  unitary case: rank(U)=" << rv.rank_u
                << " rank(U^G)=" << rv.rank_u_gamma << " controlled side "
                << rv.controlled_side << "\n";
      entry["unitary_case"] = {{"rank_u", rv.rank_u},
                               {"rank_u_gamma", rv.rank_u_gamma},
                               {"equal", rv.equal},
                               {"controlled_side", rv.controlled_side}};
      if (!rv.equal) ++violations;
    }
    reports.push_back(std::move(entry));
  }

  emit_report({{"command", "rankcheck"},
               {"violations", violations},
               {"reports", reports}});
  if (violations > 0) {
    std::cerr << "flagged " << violations
              << " violation(s); see the report above\n";
    return kExitAnomaly;
  }
  return kExitOk;
}

int cmd_fixtures(bool list, const std::string& emit_name,
                 const std::string& emit_dir) {
  if (list) {
    for (const Fixture& f : fixture_gallery()) {
      const BipartiteUnitary u = f.build();
      std::cout << f.name << "  (" << u.d_a << "x" << u.d_b << ")  "
                << f.description << "\n";
    }
    json names = json::array();
    for (const Fixture& f : fixture_gallery()) names.push_back(f.name);
    emit_report({{"command", "fixtures"}, {"fixtures", names}});
    return kExitOk;
  }
  const Fixture& f = fixture_by_name(emit_name);
  const BipartiteUnitary u = f.build();
  std::filesystem::create_directories(emit_dir);
  MatrixFile file{u.d_a, u.d_b, f.name, f.description, u.matrix};
  const std::string path = emit_dir + "/" + f.name + ".json";
  save_matrix_file(file, path);
  std::cout << "wrote " << path << "\n";
  emit_report({{"command", "fixtures"}, {"written", path}});
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"structure analysis and LOCC simulation for bipartite "
               "unitary operators"};
  app.require_subcommand(1);
  app.fallthrough();

  Tolerance tol;
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for all randomized routines");
  app.add_option("--rank-tol", tol.rank_rel, "relative rank cutoff");
  app.add_option("--commute-tol", tol.commute, "criterion tolerance");
  app.add_option("--unitarity-tol", tol.unitarity, "unitarity tolerance");

  std::string schmidt_file, schmidt_out;
  CLI::App* schmidt_cmd =
      app.add_subcommand("schmidt", "operator Schmidt decomposition");
  schmidt_cmd->add_option("file", schmidt_file)->required();
  schmidt_cmd->add_option("--out", schmidt_out,
                          "directory for the factor matrices");

  std::string detect_file, detect_side = "both";
  CLI::App* detect_cmd = app.add_subcommand(
      "detect", "controlled / block-controlled structure detection");
  detect_cmd->add_option("file", detect_file)->required();
  detect_cmd->add_option("--side", detect_side, "A, B or both")
      ->check(CLI::IsMember({"A", "B", "both"}));

  std::string dec_file, dec_side, dec_out;
  CLI::App* dec_cmd =
      app.add_subcommand("decompose", "extract an explicit controlled form");
  dec_cmd->add_option("file", dec_file)->required();
  dec_cmd->add_option("--side", dec_side)->required()
      ->check(CLI::IsMember({"A", "B"}));
  dec_cmd->add_option("--out", dec_out, "directory for q, r and the groups");

  std::string sl_u, sl_v, sl_w;
  CLI::App* sl_cmd = app.add_subcommand(
      "sl2lu", "canonicalize a stochastic-local witness to local unitaries");
  sl_cmd->add_option("fileU", sl_u)->required();
  sl_cmd->add_option("fileV", sl_v)->required();
  sl_cmd->add_option("--witness", sl_w)->required();

  std::string prot_file, prot_input = "random", prot_choice = "auto";
  CLI::App* prot_cmd =
      app.add_subcommand("protocol", "simulate an LOCC implementation");
  prot_cmd->add_option("file", prot_file)->required();
  prot_cmd->add_option("--input", prot_input,
                       "'random' or a state file path");
  prot_cmd->add_option("--protocol", prot_choice)
      ->check(CLI::IsMember({"auto", "teleport", "controlled"}));

  std::vector<std::string> rank_files;
  bool rank_random = false;
  int rank_k = 3, rank_trials = 100, rank_min = 2, rank_max = 6;
  CLI::App* rank_cmd =
      app.add_subcommand("rankcheck", "Kronecker-sum rank inequality checks");
  rank_cmd->add_option("files", rank_files);
  rank_cmd->add_flag("--random", rank_random, "run random instances");
  rank_cmd->add_option("--k", rank_k, "number of terms");
  rank_cmd->add_option("--trials", rank_trials);
  rank_cmd->add_option("--min-size", rank_min);
  rank_cmd->add_option("--max-size", rank_max);

  bool fix_list = false;
  std::string fix_emit, fix_dir = ".";
  CLI::App* fix_cmd = app.add_subcommand("fixtures", "the fixture gallery");
  fix_cmd->add_flag("--list", fix_list);
  fix_cmd->add_option("--emit", fix_emit, "fixture name to write");
  fix_cmd->add_option("dir", fix_dir, "target directory for --emit");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (schmidt_cmd->parsed()) {
      return cmd_schmidt(schmidt_file, tol, schmidt_out);
    }
    if (detect_cmd->parsed()) {
      return cmd_detect(detect_file, detect_side, tol, seed);
    }
    if (dec_cmd->parsed()) {
      return cmd_decompose(dec_file, dec_side, tol, seed, dec_out);
    }
    if (sl_cmd->parsed()) return cmd_sl2lu(sl_u, sl_v, sl_w, tol);
    if (prot_cmd->parsed()) {
      return cmd_protocol(prot_file, prot_input, prot_choice, tol, seed);
    }
    if (rank_cmd->parsed()) {
      if (!rank_random && rank_files.empty()) {
        std::cerr << "rankcheck needs files or --random\n";
        return kExitParse;
      }
      return cmd_rankcheck(rank_files, rank_random, rank_k, rank_trials,
                           rank_min, rank_max, tol, seed);
    }
    if (fix_cmd->parsed()) {
      if (!fix_list && fix_emit.empty()) {
        std::cerr << "fixtures needs --list or --emit\n";
        return kExitParse;
      }
      return cmd_fixtures(fix_list, fix_emit, fix_dir);
    }
    std::cerr << app.help();
    return kExitParse;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const TheoremViolationReport& e) {
    std::cerr << "theorem anomaly: " << e.what() << "\n";
    return kExitAnomaly;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
}

}  // namespace ustruct
