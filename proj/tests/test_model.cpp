#include <doctest.h>

#include <sstream>

#include "voltsev/errors.hpp"
#include "voltsev/model.hpp"

#include "helpers.hpp"

using namespace voltsev;
using testutil::fixed_term;
using testutil::make_spec;
using testutil::random_term;

TEST_CASE("severity names, codes and parsing") {
  CHECK(severity_name(Severity::tire_strike) == "tire_strike");
  CHECK(severity_name(Severity::most_severe) == "most_severe");
  CHECK(severity_code(Severity::police_reportable) == "PRC");
  for (int k = 0; k < kOutcomeCount; ++k) {
    const Severity s = static_cast<Severity>(k);
    CHECK(parse_severity(severity_name(s)) == s);
    CHECK(parse_severity(severity_code(s)) == s);
    CHECK(parse_severity(std::to_string(k)) == s);
  }
  CHECK_FALSE(parse_severity("fender_bender").has_value());
  CHECK_FALSE(parse_severity("4").has_value());
}

TEST_CASE("validate_spec catches structural mistakes") {
  // duplicate (variable, outcome)
  ModelSpec dup = make_spec("m", {fixed_term("x", Severity::minor_crash),
                                  fixed_term("x", Severity::minor_crash)});
  CHECK_THROWS_AS(validate_spec(dup), validation_error);

  // term on the base outcome
  ModelSpec base = make_spec("m", {fixed_term("x", Severity::tire_strike)});
  CHECK_THROWS_AS(validate_spec(base), validation_error);

  // het lists on a fixed term
  Term bad = fixed_term("x", Severity::minor_crash);
  bad.het_mean = {"z"};
  CHECK_THROWS_AS(validate_spec(make_spec("m", {bad})), validation_error);

  // duplicate het-mean variable on one term
  ModelSpec dup_z = make_spec(
      "m", {random_term("x", Severity::minor_crash, MixingKind::normal, {"z", "z"})});
  CHECK_THROWS_AS(validate_spec(dup_z), validation_error);

  // bad options
  ModelSpec zero_draws = make_spec("m", {random_term("x", Severity::minor_crash)});
  zero_draws.options.draws = 0;
  CHECK_THROWS_AS(validate_spec(zero_draws), validation_error);

  // the same variable on two outcomes is fine
  ModelSpec ok = make_spec("m", {fixed_term("x", Severity::minor_crash),
                                 fixed_term("x", Severity::most_severe)});
  CHECK_NOTHROW(validate_spec(ok));
}

TEST_CASE("fixed_counterpart strips randomness") {
  ModelSpec spec = make_spec(
      "m", {random_term("x", Severity::most_severe, MixingKind::normal, {"z"}, {"b"}),
            fixed_term("y", Severity::minor_crash)});
  ModelSpec fixed = fixed_counterpart(spec);
  CHECK_FALSE(fixed.has_random());
  REQUIRE(fixed.terms.size() == 2);
  CHECK_FALSE(fixed.terms[0].random);
  CHECK(fixed.terms[0].het_mean.empty());
  CHECK(fixed.terms[0].het_var.empty());
  CHECK(fixed.terms[0].variable == "x");
  CHECK(make_packing(fixed).n_params == 5);  // 3 constants + 2 betas
}

TEST_CASE("packing layout and names") {
  ModelSpec spec = make_spec(
      "m", {fixed_term("y", Severity::minor_crash),
            random_term("x", Severity::most_severe, MixingKind::normal, {"z1", "z2"}, {"b1"})});
  ParameterPacking pk = make_packing(spec);
  CHECK(pk.n_constants == 3);
  CHECK(pk.n_terms == 2);
  CHECK(pk.random_terms == std::vector<std::size_t>{1});
  CHECK(pk.n_params == 9);  // 3 + 2 + 1 sigma + 2 xi + 1 gamma
  CHECK(pk.names == std::vector<std::string>{
                        "const[MC]", "const[PRC]", "const[SC]", "y[MC]", "x[SC]", "sd:x[SC]",
                        "hetmean:x[SC]:z1", "hetmean:x[SC]:z2", "hetvar:x[SC]:b1"});
  CHECK(pk.const_index(Severity::minor_crash) == 0);
  CHECK(pk.const_index(Severity::most_severe) == 2);
  CHECK(pk.beta_index(0) == 3);
  CHECK(pk.beta_index(1) == 4);
  CHECK(pk.sigma_index(0) == 5);
  CHECK(pk.xi_index(0, 0) == 6);
  CHECK(pk.xi_index(0, 1) == 7);
  CHECK(pk.gamma_index(0, 0) == 8);
  CHECK(pk.kind(0) == ParamKind::constant);
  CHECK(pk.kind(4) == ParamKind::beta);
  CHECK(pk.kind(5) == ParamKind::sigma);
  CHECK(pk.kind(7) == ParamKind::xi);
  CHECK(pk.kind(8) == ParamKind::gamma);
}

TEST_CASE("packing without constants") {
  ModelSpec spec = make_spec("m", {fixed_term("x", Severity::minor_crash)});
  spec.constants = false;
  ParameterPacking pk = make_packing(spec);
  CHECK(pk.n_constants == 0);
  CHECK(pk.n_params == 1);
  CHECK(pk.beta_index(0) == 0);
}

TEST_CASE("spec json round trip") {
  ModelSpec spec = make_spec(
      "roundtrip", {random_term("x", Severity::most_severe, MixingKind::lognormal, {"z"}, {"b"}),
                    fixed_term("y", Severity::police_reportable)},
      150, 42);
  spec.weight_column = "w";
  spec.options.discard = 25;
  spec.options.scramble = true;
  spec.options.gradient_tolerance = 2e-6;
  spec.options.step_tolerance = 1e-10;
  spec.options.max_iterations = 321;

  ModelSpec back = parse_model_spec(model_spec_to_json(spec));
  CHECK(back.name == spec.name);
  CHECK(back.constants == spec.constants);
  CHECK(back.outcome_column == spec.outcome_column);
  CHECK(back.weight_column == spec.weight_column);
  REQUIRE(back.terms.size() == 2);
  CHECK(back.terms[0].variable == "x");
  CHECK(back.terms[0].outcome == Severity::most_severe);
  CHECK(back.terms[0].random);
  CHECK(back.terms[0].distribution == MixingKind::lognormal);
  CHECK(back.terms[0].het_mean == std::vector<std::string>{"z"});
  CHECK(back.terms[0].het_var == std::vector<std::string>{"b"});
  CHECK_FALSE(back.terms[1].random);
  CHECK(back.options.draws == 150);
  CHECK(back.options.seed == 42);
  CHECK(back.options.discard == 25);
  CHECK(back.options.scramble);
  CHECK(back.options.gradient_tolerance == 2e-6);
  CHECK(back.options.step_tolerance == 1e-10);
  CHECK(back.options.max_iterations == 321);
}

TEST_CASE("spec json validation") {
  CHECK_THROWS_AS(parse_model_spec("not json"), validation_error);
  // constants-only (no terms) is a legitimate null model
  CHECK_NOTHROW(parse_model_spec(R"({"name":"null","terms":[]})"));
  // unknown distribution
  CHECK_THROWS_AS(
      parse_model_spec(
          R"({"name":"m","terms":[{"variable":"x","outcome":"minor_crash","random":true,"distribution":"cauchy"}]})"),
      validation_error);
  // bad outcome name
  CHECK_THROWS_AS(
      parse_model_spec(R"({"name":"m","terms":[{"variable":"x","outcome":"mild"}]})"),
      validation_error);
  // a minimal fixed spec parses with defaults
  ModelSpec minimal = parse_model_spec(
      R"({"name":"m","terms":[{"variable":"x","outcome":"minor_crash"}]})");
  CHECK(minimal.constants);
  CHECK(minimal.options.draws == 200);
  CHECK(minimal.options.discard == 50);
}

TEST_CASE("events csv round trip") {
  EventDataset data;
  data.covariates.columns = {"x"};
  data.covariates.event_ids = {"a", "b", "c", "d"};
  data.covariates.cells = {{1.0}, {2.0}, {std::nullopt}, {4.0}};
  data.outcomes = {Severity::tire_strike, Severity::minor_crash, Severity::police_reportable,
                   Severity::most_severe};
  std::ostringstream out;
  write_events_csv(out, data);
  std::istringstream in(out.str());
  EventDataset back = read_events_csv(in);
  CHECK(back.outcomes == data.outcomes);
  CHECK(back.covariates.event_ids == data.covariates.event_ids);
  CHECK(back.covariates.cells == data.covariates.cells);
}

TEST_CASE("read_events_csv accepts codes and levels, flags junk") {
  std::istringstream in(
      "event_id,severity,x\n"
      "a,TS,1\n"
      "b,2,1\n"
      "c,most_severe,1\n");
  EventDataset data = read_events_csv(in);
  CHECK(data.outcomes == std::vector<Severity>{Severity::tire_strike,
                                               Severity::police_reportable,
                                               Severity::most_severe});

  std::istringstream bad(
      "event_id,severity,x\n"
      "a,unknown,1\n");
  CHECK_THROWS_AS(read_events_csv(bad), validation_error);

  std::istringstream missing("event_id,x\na,1\n");
  CHECK_THROWS_AS(read_events_csv(missing), validation_error);
}

TEST_CASE("custom outcome column") {
  std::istringstream in(
      "event_id,crash_level,x\n"
      "a,MC,1\n");
  EventDataset data = read_events_csv(in, "crash_level");
  CHECK(data.outcomes == std::vector<Severity>{Severity::minor_crash});
}

TEST_CASE("join_features inner-joins on event_id") {
  EventDataset events;
  events.covariates.columns = {"x"};
  events.covariates.event_ids = {"a", "b", "c"};
  events.covariates.cells = {{1.0}, {2.0}, {3.0}};
  events.outcomes = {Severity::minor_crash, Severity::most_severe, Severity::tire_strike};

  DataTable features;
  features.columns = {"cv"};
  features.event_ids = {"c", "a"};
  features.cells = {{0.3}, {0.1}};

  EventDataset joined = join_features(events, features);
  CHECK(joined.covariates.event_ids == std::vector<std::string>{"a", "c"});
  CHECK(joined.outcomes ==
        std::vector<Severity>{Severity::minor_crash, Severity::tire_strike});
  CHECK(joined.covariates.columns == std::vector<std::string>{"x", "cv"});
  CHECK(joined.covariates.cells[1] == std::vector<std::optional<double>>{3.0, 0.3});
}

TEST_CASE("validate_spec_columns names the missing variable") {
  ModelSpec spec = make_spec("m", {fixed_term("ghost", Severity::minor_crash)});
  DataTable cov;
  cov.columns = {"x"};
  cov.event_ids = {"a"};
  cov.cells = {{1.0}};
  try {
    validate_spec_columns(spec, cov);
    FAIL("expected validation_error");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}
