#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pdhw/cohort.hpp"
#include "pdhw/synth.hpp"
#include "pdhw/util.hpp"

using namespace pdhw;

namespace {

Err code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Err::IoFailure;
}

}  // namespace

TEST_CASE("parse_recording reads a minimal valid file") {
  testfx::TempDir dir("rec_min");
  const auto path =
      testfx::write_text(dir.path() / "task1.svc", "2\n0 0 0.00 1 100\n10 0 0.10 1 100\n");
  const auto rec = parse_recording(path, "01", 1);
  REQUIRE(rec.samples.size() == 2);
  CHECK(rec.duration() == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(rec.samples[1].x == 10.0);
  CHECK(rec.samples[1].button == 1);
  CHECK(rec.samples[1].pressure == 100.0);
}

TEST_CASE("parse_recording rejects malformed inputs with the matching error") {
  testfx::TempDir dir("rec_bad");
  auto parse = [&](const std::string& name, const std::string& content) {
    const auto path = testfx::write_text(dir.path() / name, content);
    return code_of([&] { parse_recording(path, "01", 1); });
  };

  CHECK(parse("count.svc", "3\n0 0 0.0 1 1\n1 0 0.1 1 1\n") == Err::CountMismatch);
  CHECK(parse("cols.svc", "1\n0 0 0.0 1\n") == Err::MalformedLine);
  CHECK(parse("numeric.svc", "1\n0 x 0.0 1 1\n") == Err::MalformedLine);
  CHECK(parse("button.svc", "2\n0 0 0.0 2 1\n1 0 0.1 1 1\n") == Err::MalformedLine);
  CHECK(parse("negpress.svc", "2\n0 0 0.0 1 -5\n1 0 0.1 1 1\n") == Err::MalformedLine);
  CHECK(parse("time.svc", "3\n0 0 0.2 1 1\n1 0 0.1 1 1\n2 0 0.3 1 1\n") ==
        Err::NonMonotoneTime);
  CHECK(parse("onsurf.svc", "3\n0 0 0.0 0 0\n1 0 0.1 1 1\n2 0 0.2 0 0\n") ==
        Err::TooFewOnSurface);
  CHECK(parse("header.svc", "x\n") == Err::MalformedLine);
}

TEST_CASE("integer-millisecond timestamps are normalized to seconds") {
  testfx::TempDir dir("rec_ms");
  const auto path = testfx::write_text(dir.path() / "ms.svc",
                                       "3\n0 0 0 1 10\n1 0 10 1 10\n2 0 20 1 10\n");
  const auto rec = parse_recording(path, "01", 1);
  CHECK(rec.samples[1].t == doctest::Approx(0.010).epsilon(1e-12));
  CHECK(rec.duration() == doctest::Approx(0.020).epsilon(1e-12));
}

TEST_CASE("residual in-air pressure is flagged, never rejected") {
  testfx::TempDir dir("rec_flag");
  const auto path = testfx::write_text(
      dir.path() / "flag.svc", "3\n0 0 0.0 1 50\n1 0 0.1 0 7\n2 0 0.2 1 60\n");
  const auto rec = parse_recording(path, "01", 1);
  CHECK(rec.residual_pressure_count == 1);
}

TEST_CASE("write then parse is the identity on canonical files") {
  // Generator output re-parsed must equal what was written, sample for sample,
  // and a second write must be byte-identical.
  SynthSpec spec;
  spec.seed = 42;
  spec.n_per_group = 2;
  spec.tasks = {1, 2};
  const auto synth = generate(spec);

  testfx::TempDir dir("roundtrip");
  int checked = 0;
  for (const auto& [key, rec] : synth.cohort.recordings) {
    const auto path = dir.path() / "r.svc";
    write_recording(path, rec);
    const auto reparsed = parse_recording(path, key.first, key.second);
    REQUIRE(reparsed.samples.size() == rec.samples.size());
    for (size_t i = 0; i < rec.samples.size(); ++i) {
      CHECK(reparsed.samples[i].x == rec.samples[i].x);
      CHECK(reparsed.samples[i].y == rec.samples[i].y);
      CHECK(reparsed.samples[i].t == rec.samples[i].t);
      CHECK(reparsed.samples[i].button == rec.samples[i].button);
      CHECK(reparsed.samples[i].pressure == rec.samples[i].pressure);
    }
    const std::string bytes = testfx::read_text(path);
    write_recording(path, reparsed);
    CHECK(testfx::read_text(path) == bytes);
    ++checked;
  }
  CHECK(checked == 8);  // 4 subjects x 2 tasks
}

TEST_CASE("fuzzed invariant violations map to the right errors") {
  testfx::TempDir dir("fuzz");
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(20));
    std::string body;
    double t = 0.0;
    // Pick one violation kind to inject.
    const int kind = static_cast<int>(rng.below(3));
    const size_t victim = 1 + rng.below(static_cast<size_t>(n - 1));
    int claimed = n;
    bool expect_time = false, expect_line = false, expect_count = false;
    for (int i = 0; i < n; ++i) {
      double ti = t;
      std::string button = "1";
      if (kind == 0 && static_cast<size_t>(i) == victim) {
        ti = t - 0.05;  // clock steps backwards
        expect_time = true;
      }
      if (kind == 1 && static_cast<size_t>(i) == victim) {
        button = "5";
        expect_line = true;
      }
      body += format_double(rng.unit() * 100) + " " + format_double(rng.unit() * 100) + " " +
              format_double(ti) + " " + button + " " +
              format_double(std::floor(rng.unit() * 500)) + "\n";
      t += 0.01;
    }
    if (kind == 2) {
      claimed = n + 1;
      expect_count = true;
    }
    const auto path = testfx::write_text(dir.path() / "fuzz.svc",
                                         std::to_string(claimed) + "\n" + body);
    const Err code = code_of([&] { parse_recording(path, "01", 1); });
    // Button violations on the victim line are reported before any later
    // time violation on the same file; each trial injects exactly one kind.
    if (expect_line) CHECK(code == Err::MalformedLine);
    else if (expect_time) CHECK(code == Err::NonMonotoneTime);
    else if (expect_count) CHECK(code == Err::CountMismatch);
  }
}

TEST_CASE("parse_manifest reads clinical rows") {
  testfx::TempDir dir("manifest");
  const auto path = testfx::write_text(dir.path() / "manifest.csv", testfx::kClinicalManifest);
  const auto subjects = parse_manifest(path);
  REQUIRE(subjects.size() == 75);

  const auto& first = subjects[0];
  CHECK(first.id == "01");
  CHECK(first.sex == Sex::F);
  CHECK(first.diagnosis == Diagnosis::PD);
  CHECK(first.age == 68.0);
  CHECK(first.led == 1115.0);
  CHECK(first.updrs_v == 2.0);
  CHECK(first.years_since_diag == 6.0);

  const auto* healthy = [&]() -> const SubjectRecord* {
    for (const auto& s : subjects)
      if (s.id == "26") return &s;
    return nullptr;
  }();
  REQUIRE(healthy != nullptr);
  CHECK(healthy->diagnosis == Diagnosis::Healthy);
  CHECK(healthy->age == 57.0);
  CHECK_FALSE(healthy->led.has_value());
  CHECK_FALSE(healthy->updrs_v.has_value());
  CHECK_FALSE(healthy->years_since_diag.has_value());
}

TEST_CASE("parse_manifest rejects duplicates and inconsistent rows") {
  testfx::TempDir dir("manifest_bad");
  auto parse = [&](const std::string& rows) {
    const auto path = testfx::write_text(
        dir.path() / "m.csv", "id,sex,diagnosis,age,led,updrs_v,years_since_diag\n" + rows);
    return code_of([&] { parse_manifest(path); });
  };
  CHECK(parse("01,F,PD,68,1115,2,6\n01,M,healthy,44,-,-,-\n") == Err::DuplicateId);
  CHECK(parse("01,F,PD,sixty,1115,2,6\n") == Err::MalformedRow);
  CHECK(parse("01,X,PD,68,1115,2,6\n") == Err::MalformedRow);
  CHECK(parse("01,F,healthy,68,1115,2,6\n") == Err::MalformedRow);  // clinical fields on control
  CHECK(parse("01,F,PD,68,1115,2\n") == Err::MalformedRow);
}

TEST_CASE("manifest write/parse round trip") {
  testfx::TempDir dir("manifest_rt");
  const auto path = testfx::write_text(dir.path() / "manifest.csv", testfx::kClinicalManifest);
  const auto subjects = parse_manifest(path);
  const auto copy = dir.path() / "copy.csv";
  write_manifest(copy, subjects);
  CHECK(testfx::read_text(copy) == testfx::kClinicalManifest);
}

TEST_CASE("cohort_summary reproduces the published group characteristics") {
  testfx::TempDir dir("summary");
  Cohort cohort;
  cohort.subjects =
      parse_manifest(testfx::write_text(dir.path() / "m.csv", testfx::kClinicalManifest));
  const auto summary = cohort_summary(cohort);

  CHECK(summary.pd.count == 37);
  CHECK(summary.healthy.count == 38);
  CHECK(summary.pd.males == 19);
  CHECK(summary.pd.females == 18);
  CHECK(summary.healthy.males == 20);
  CHECK(summary.healthy.females == 18);
  // Published group means, +-0.5 (rounding conventions unstated upstream).
  CHECK(std::abs(summary.pd.age.mean - 69.3) < 0.5);
  CHECK(std::abs(summary.healthy.age.mean - 62.4) < 0.5);
  CHECK(std::abs(summary.pd.updrs_v.mean - 2.27) < 0.5);
  CHECK(summary.healthy.updrs_v.n == 0);
  CHECK(summary.healthy.led.n == 0);
}

TEST_CASE("cohort_summary matches a direct two-pass recomputation") {
  Rng rng(7);
  Cohort cohort;
  std::vector<double> pd_ages;
  for (int i = 0; i < 10; ++i) {
    SubjectRecord s;
    s.id = "R" + std::to_string(i);
    s.sex = rng.unit() < 0.5 ? Sex::M : Sex::F;
    s.diagnosis = i < 6 ? Diagnosis::PD : Diagnosis::Healthy;
    s.age = 40.0 + rng.unit() * 50.0;
    if (s.diagnosis == Diagnosis::PD) {
      s.led = 300.0 + rng.unit() * 2000.0;
      s.updrs_v = 1.0 + rng.unit() * 4.0;
      s.years_since_diag = rng.unit() * 20.0;
      pd_ages.push_back(s.age);
    }
    cohort.subjects.push_back(s);
  }
  const auto summary = cohort_summary(cohort);

  double mean = 0.0;
  for (double a : pd_ages) mean += a;
  mean /= pd_ages.size();
  double var = 0.0;
  for (double a : pd_ages) var += (a - mean) * (a - mean);
  const double stdev = std::sqrt(var / (pd_ages.size() - 1));
  CHECK(summary.pd.age.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(*summary.pd.age.stdev == doctest::Approx(stdev).epsilon(1e-12));
}

TEST_CASE("single-subject group has mean but no std") {
  Cohort cohort;
  SubjectRecord pd;
  pd.id = "a";
  pd.diagnosis = Diagnosis::PD;
  pd.age = 70;
  pd.led = 100;
  pd.updrs_v = 2;
  pd.years_since_diag = 3;
  SubjectRecord h;
  h.id = "b";
  h.diagnosis = Diagnosis::Healthy;
  h.age = 60;
  cohort.subjects = {pd, h};
  const auto summary = cohort_summary(cohort);
  CHECK(summary.pd.age.mean == 70.0);
  CHECK_FALSE(summary.pd.age.stdev.has_value());

  Cohort only_pd;
  only_pd.subjects = {pd};
  CHECK(code_of([&] { cohort_summary(only_pd); }) == Err::EmptyGroup);
}

TEST_CASE("load_cohort reads the documented directory layout") {
  SynthSpec spec;
  spec.seed = 5;
  spec.n_per_group = 3;
  spec.tasks = {2, 3};
  const auto synth = generate(spec);

  testfx::TempDir dir("layout");
  write_cohort(dir.path(), synth.cohort);

  LoadDiagnostics diag;
  const auto loaded = load_cohort(dir.path(), {}, &diag);
  CHECK(loaded.subjects.size() == 6);
  CHECK(loaded.recordings.size() == 12);
  CHECK(diag.files_parsed == 12);
  // Tasks 1 and 4..8 are absent for every subject.
  CHECK(diag.missing_tasks.size() == 6 * 6);
  for (const auto& [key, rec] : loaded.recordings) {
    CHECK(rec.on_surface_count() >= 2);
    CHECK(loaded.find_subject(key.first) != nullptr);
  }
}
