// bcidx: proof kernel and bounded proof search for a first-order
// indistinguishability logic with IND-CCA2 axioms.
//
// Subcommands: normalize, check, search, restr-elim, candidates, length.
// Exit codes: 0 success/accept, 1 reject/not-found, 2 malformed input.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bcidx/parse.hpp"
#include "bcidx/proof_io.hpp"
#include "bcidx/search.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string order_file;
  std::string format = "text";
};

bcidx::CanonicalOrder load_order(const CommonOpts& opts, const bcidx::Signature& sig) {
  bcidx::CanonicalOrder ord;
  if (!opts.order_file.empty()) ord.set_user_order(bcidx::parse_order_file(opts.order_file, sig));
  return ord;
}

json diags_to_json(const std::vector<bcidx::Diag>& ds) {
  json arr = json::array();
  for (const auto& d : ds) {
    json j{{"category", d.category}, {"message", d.message}};
    if (!d.path.empty()) j["path"] = d.path;
    arr.push_back(j);
  }
  return arr;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string path_str(const std::vector<uint32_t>& p) {
  std::string s;
  for (uint32_t i : p) s += "/" + std::to_string(i);
  return s.empty() ? "/" : s;
}

int cmd_check(const std::string& input, const CommonOpts& opts) {
  bcidx::ProofFile pf = bcidx::parse_proof_file(input);
  bcidx::CanonicalOrder ord = load_order(opts, pf.sig);
  bcidx::Verdict v = bcidx::check_proof(pf.proof, ord, pf.decls);
  if (opts.format == "json") {
    json j{{"command", "check"},
           {"verdict", v.ok ? "accept" : "reject"},
           {"diagnostics", diags_to_json(v.diags)},
           {"notes", diags_to_json(v.notes)}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (v.ok ? "accept" : "reject") << "\n";
    for (const auto& d : v.diags)
      std::cout << "  at " << path_str(d.path) << " [" << d.category << "] " << d.message << "\n";
    for (const auto& d : v.notes)
      std::cout << "  note at " << path_str(d.path) << " [" << d.category << "] " << d.message
                << "\n";
  }
  return v.ok ? 0 : 1;
}

int cmd_normalize(const std::string& input, const CommonOpts& opts) {
  bcidx::TermFile tf = bcidx::parse_term_file(input);
  bcidx::CanonicalOrder ord = load_order(opts, tf.sig);
  std::cout << bcidx::render_term(bcidx::normalize(tf.term, ord)) << "\n";
  return 0;
}

int cmd_length(const std::string& input, const CommonOpts&) {
  bcidx::TermFile tf = bcidx::parse_term_file(input);
  auto len = bcidx::length_of(tf.term, tf.decls);
  std::cout << (len ? len->render() : "undefined") << "\n";
  return 0;
}

int cmd_candidates(const std::string& input, const CommonOpts& opts) {
  bcidx::GoalFile gf = bcidx::parse_goal_file(input);
  bcidx::CanonicalOrder ord = load_order(opts, gf.sig);
  bcidx::CandidateSet cs = bcidx::candidate_terms(bcidx::Sequent{gf.left, gf.right}, ord);
  for (const auto& t : cs.terms) std::cout << bcidx::render_term(t) << "\n";
  return 0;
}

int cmd_search(const std::string& input, const CommonOpts& opts, const bcidx::SearchBudget& budget,
               const std::string& emit) {
  bcidx::GoalFile gf = bcidx::parse_goal_file(input);
  bcidx::CanonicalOrder ord = load_order(opts, gf.sig);
  bcidx::Sequent goal{gf.left, gf.right};
  bcidx::SearchResult res = bcidx::search(goal, budget, ord, gf.decls, gf.hints);
  if (res.status == bcidx::SearchStatus::Found) {
    std::string text = bcidx::render_proof_file(*res.proof, gf.decls);
    if (!emit.empty()) write_output(emit, text);
    auto stats = bcidx::proof_stats(*res.proof);
    if (opts.format == "json") {
      json j{{"command", "search"},
             {"verdict", "found"},
             {"nodes", stats.node_count},
             {"height", stats.height},
             {"expanded", res.expanded_nodes}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "proof found: " << stats.node_count << " nodes, height " << stats.height
                << " (" << res.expanded_nodes << " states expanded)\n";
      if (emit.empty()) std::cout << text;
    }
    return 0;
  }
  const char* verdict = res.status == bcidx::SearchStatus::Timeout ? "timeout" : "not-found";
  if (opts.format == "json") {
    json j{{"command", "search"}, {"verdict", verdict}, {"expanded", res.expanded_nodes}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << verdict << "\n";
  }
  return 1;
}

int cmd_restr_elim(const std::string& input, const CommonOpts& opts, const std::string& out) {
  bcidx::ProofFile pf = bcidx::parse_proof_file(input);
  bcidx::CanonicalOrder ord = load_order(opts, pf.sig);
  bcidx::Verdict v = bcidx::check_proof(pf.proof, ord, pf.decls);
  if (!v.ok) {
    std::cerr << "input proof does not check:";
    for (const auto& d : v.diags) std::cerr << " [" << d.category << "] " << d.message;
    std::cerr << "\n";
    return 1;
  }
  bcidx::Derivation out_proof = bcidx::eliminate_restr(pf.proof);
  write_output(out, bcidx::render_proof_file(out_proof, pf.decls));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bcidx: indistinguishability proof kernel and bounded proof search"};
  app.require_subcommand(1);

  CommonOpts opts;
  bcidx::SearchBudget budget;
  std::string input, emit, out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", input, "input file")->required();
    sub->add_option("--order", opts.order_file, "user conditional-order override file");
    sub->add_option("--format", opts.format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
  };

  add_common(app.add_subcommand("normalize", "print the R-normal form of a term"));
  add_common(app.add_subcommand("check", "check a serialized derivation"));
  add_common(app.add_subcommand("length", "print the length expression of a term"));
  add_common(app.add_subcommand("candidates", "print the candidate-term pool of a goal"));

  auto* srch = app.add_subcommand("search", "bounded backward proof search for a goal");
  add_common(srch);
  srch->add_option("--max-depth", budget.max_depth, "maximum proof height explored");
  srch->add_option("--max-candidates", budget.max_candidates, "candidate pool cap");
  srch->add_option("--timeout", budget.timeout_seconds, "timeout in seconds");
  srch->add_option("--max-nested-cs", budget.max_nested_cs, "nested case-study cap (0 = auto)");
  srch->add_option("--jobs", budget.jobs, "parallel branch search");
  srch->add_option("--emit", emit, "write the found proof to this file");

  auto* relim = app.add_subcommand("restr-elim", "rewrite a proof to one without Restr");
  add_common(relim);
  relim->add_option("-o,--emit", out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("normalize")) return cmd_normalize(input, opts);
    if (app.got_subcommand("check")) return cmd_check(input, opts);
    if (app.got_subcommand("length")) return cmd_length(input, opts);
    if (app.got_subcommand("candidates")) return cmd_candidates(input, opts);
    if (app.got_subcommand("search")) return cmd_search(input, opts, budget, emit);
    if (app.got_subcommand("restr-elim")) return cmd_restr_elim(input, opts, out);
  } catch (const bcidx::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
