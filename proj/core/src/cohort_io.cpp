#include "pdhw/cohort.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "pdhw/util.hpp"

namespace pdhw {

const char* err_name(Err code) {
  switch (code) {
    case Err::MalformedLine: return "MalformedLine";
    case Err::CountMismatch: return "CountMismatch";
    case Err::NonMonotoneTime: return "NonMonotoneTime";
    case Err::TooFewOnSurface: return "TooFewOnSurface";
    case Err::MalformedRow: return "MalformedRow";
    case Err::DuplicateId: return "DuplicateId";
    case Err::EmptyGroup: return "EmptyGroup";
    case Err::SpanTooLarge: return "SpanTooLarge";
    case Err::SeriesTooShort: return "SeriesTooShort";
    case Err::AllTimestampsEqual: return "AllTimestampsEqual";
    case Err::StrokeTooShort: return "StrokeTooShort";
    case Err::ZeroDuration: return "ZeroDuration";
    case Err::NoStrokes: return "NoStrokes";
    case Err::EmptyInput: return "EmptyInput";
    case Err::TaskUnavailable: return "TaskUnavailable";
    case Err::NoCommonSubjects: return "NoCommonSubjects";
    case Err::DegenerateFitSet: return "DegenerateFitSet";
    case Err::ConstantLabels: return "ConstantLabels";
    case Err::NoSignificantFeatures: return "NoSignificantFeatures";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::SingleClass: return "SingleClass";
    case Err::EmptyModel: return "EmptyModel";
    case Err::TooFewSamples: return "TooFewSamples";
    case Err::ClassTooSmall: return "ClassTooSmall";
    case Err::InvalidSpec: return "InvalidSpec";
    case Err::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  unsigned workers = std::max(1u, threads);
  workers = static_cast<unsigned>(std::min<size_t>(workers, n));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool all_integral(const std::vector<Sample>& samples) {
  for (const auto& s : samples) {
    if (s.t != std::floor(s.t)) return false;
  }
  return true;
}

double median_positive_step(const std::vector<Sample>& samples) {
  std::vector<double> steps;
  for (size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].t - samples[i - 1].t;
    if (dt > 0.0) steps.push_back(dt);
  }
  if (steps.empty()) return 0.0;
  std::sort(steps.begin(), steps.end());
  return steps[steps.size() / 2];
}

}  // namespace

Recording parse_recording(const std::filesystem::path& path, const std::string& subject_id,
                          int task_id, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) raise(Err::IoFailure, "cannot open recording file " + path.string());

  const std::string context = path.filename().string();
  std::string line;
  if (!std::getline(in, line)) raise(Err::MalformedLine, context + ":1 empty file");
  line = strip_cr(line);

  long expected = -1;
  {
    auto value = parse_double(line);
    if (!value || *value < 0 || *value != std::floor(*value)) {
      raise(Err::MalformedLine, context + ":1 header is not a sample count: '" + line + "'");
    }
    expected = static_cast<long>(*value);
  }

  Recording rec;
  rec.subject_id = subject_id;
  rec.task_id = task_id;
  rec.nominal_rate_hz = options.nominal_rate_hz;
  rec.scale_mm_per_unit = options.scale_mm_per_unit;
  rec.samples.reserve(static_cast<size_t>(expected));

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() != 5) {
      raise(Err::MalformedLine,
            context + ":" + std::to_string(line_no) + " expected 5 columns, got " +
                std::to_string(fields.size()));
    }
    Sample s;
    double button_raw = 0.0;
    const std::pair<std::string_view, double*> cols[] = {
        {fields[0], &s.x}, {fields[1], &s.y}, {fields[2], &s.t},
        {fields[3], &button_raw}, {fields[4], &s.pressure}};
    for (const auto& [text, slot] : cols) {
      auto value = parse_double(text);
      if (!value || !std::isfinite(*value)) {
        raise(Err::MalformedLine, context + ":" + std::to_string(line_no) +
                                      " non-numeric field '" + std::string(text) + "'");
      }
      *slot = *value;
    }
    if (button_raw != 0.0 && button_raw != 1.0) {
      raise(Err::MalformedLine,
            context + ":" + std::to_string(line_no) + " button must be 0 or 1");
    }
    s.button = static_cast<int>(button_raw);
    if (s.pressure < 0.0) {
      raise(Err::MalformedLine, context + ":" + std::to_string(line_no) + " negative pressure");
    }
    rec.samples.push_back(s);
  }

  if (static_cast<long>(rec.samples.size()) != expected) {
    raise(Err::CountMismatch, context + " header says " + std::to_string(expected) +
                                  " samples, file has " + std::to_string(rec.samples.size()));
  }

  // Integer timestamps with a coarse step are milliseconds; normalize.
  if (rec.samples.size() >= 2 && all_integral(rec.samples) &&
      median_positive_step(rec.samples) > 0.5) {
    for (auto& s : rec.samples) s.t /= 1000.0;
  }

  for (size_t i = 1; i < rec.samples.size(); ++i) {
    if (rec.samples[i].t < rec.samples[i - 1].t) {
      raise(Err::NonMonotoneTime,
            context + ":" + std::to_string(i + 2) + " timestamp decreases");
    }
  }

  for (const auto& s : rec.samples) {
    if (s.button == 0 && s.pressure > 0.0) ++rec.residual_pressure_count;
  }

  if (rec.on_surface_count() < 2) {
    raise(Err::TooFewOnSurface, context + " has fewer than 2 on-surface samples");
  }
  return rec;
}

void write_recording(const std::filesystem::path& path, const Recording& recording) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::IoFailure, "cannot write recording file " + path.string());
  out << recording.samples.size() << "\n";
  for (const auto& s : recording.samples) {
    out << format_double(s.x) << ' ' << format_double(s.y) << ' ' << format_double(s.t) << ' '
        << s.button << ' ' << format_double(s.pressure) << "\n";
  }
}

namespace {

std::optional<double> parse_optional_field(std::string_view text, const std::string& context) {
  if (text == "-") return std::nullopt;
  auto value = parse_double(text);
  if (!value) raise(Err::MalformedRow, context + " bad numeric field '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::vector<SubjectRecord> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Err::IoFailure, "cannot open manifest " + path.string());

  std::string line;
  if (!std::getline(in, line)) raise(Err::MalformedRow, "manifest is empty");
  line = strip_cr(line);
  if (line != "id,sex,diagnosis,age,led,updrs_v,years_since_diag") {
    raise(Err::MalformedRow, "manifest header mismatch: '" + line + "'");
  }

  std::vector<SubjectRecord> subjects;
  std::set<std::string> seen;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string context = "manifest row " + std::to_string(row_no);
    auto fields = split(line, ',');
    if (fields.size() != 7) raise(Err::MalformedRow, context + " expected 7 columns");

    SubjectRecord rec;
    rec.id = std::string(fields[0]);
    if (rec.id.empty()) raise(Err::MalformedRow, context + " empty id");
    if (!seen.insert(rec.id).second) raise(Err::DuplicateId, "subject id '" + rec.id + "'");

    if (fields[1] == "M") rec.sex = Sex::M;
    else if (fields[1] == "F") rec.sex = Sex::F;
    else raise(Err::MalformedRow, context + " sex must be M or F");

    if (fields[2] == "PD") rec.diagnosis = Diagnosis::PD;
    else if (fields[2] == "healthy") rec.diagnosis = Diagnosis::Healthy;
    else raise(Err::MalformedRow, context + " diagnosis must be PD or healthy");

    auto age = parse_double(fields[3]);
    if (!age) raise(Err::MalformedRow, context + " bad age");
    rec.age = *age;

    rec.led = parse_optional_field(fields[4], context);
    rec.updrs_v = parse_optional_field(fields[5], context);
    rec.years_since_diag = parse_optional_field(fields[6], context);

    if (rec.diagnosis == Diagnosis::Healthy &&
        (rec.led || rec.updrs_v || rec.years_since_diag)) {
      raise(Err::MalformedRow, context + " healthy subject with clinical fields");
    }
    subjects.push_back(std::move(rec));
  }
  return subjects;
}

void write_manifest(const std::filesystem::path& path, const std::vector<SubjectRecord>& subjects) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::IoFailure, "cannot write manifest " + path.string());
  out << "id,sex,diagnosis,age,led,updrs_v,years_since_diag\n";
  auto field = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("-");
  };
  for (const auto& s : subjects) {
    out << s.id << ',' << to_string(s.sex) << ',' << to_string(s.diagnosis) << ','
        << format_double(s.age) << ',' << field(s.led) << ',' << field(s.updrs_v) << ','
        << field(s.years_since_diag) << "\n";
  }
}

Cohort load_cohort(const std::filesystem::path& root, const ParseOptions& options,
                   LoadDiagnostics* diagnostics) {
  Cohort cohort;
  cohort.subjects = parse_manifest(root / "manifest.csv");

  for (const auto& subject : cohort.subjects) {
    for (int task = 1; task <= 8; ++task) {
      const auto file = root / subject.id / ("task" + std::to_string(task) + ".svc");
      if (!std::filesystem::exists(file)) {
        if (diagnostics) diagnostics->missing_tasks.push_back(subject.id + "/task" + std::to_string(task));
        continue;
      }
      Recording rec = parse_recording(file, subject.id, task, options);
      if (diagnostics) {
        ++diagnostics->files_parsed;
        diagnostics->residual_pressure_samples += rec.residual_pressure_count;
      }
      cohort.recordings.emplace(std::make_pair(subject.id, task), std::move(rec));
    }
  }
  return cohort;
}

namespace {

FieldStats field_stats(const std::vector<double>& values) {
  FieldStats out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) return out;
  out.mean = mean_of(values);
  if (values.size() >= 2) out.stdev = sample_std(values);
  return out;
}

GroupSummary summarize_group(const std::vector<const SubjectRecord*>& members) {
  GroupSummary g;
  g.count = static_cast<int>(members.size());
  std::vector<double> age, updrs, years, led;
  for (const auto* s : members) {
    (s->sex == Sex::M ? g.males : g.females) += 1;
    age.push_back(s->age);
    if (s->updrs_v) updrs.push_back(*s->updrs_v);
    if (s->years_since_diag) years.push_back(*s->years_since_diag);
    if (s->led) led.push_back(*s->led);
  }
  g.age = field_stats(age);
  g.updrs_v = field_stats(updrs);
  g.years_since_diag = field_stats(years);
  g.led = field_stats(led);
  return g;
}

}  // namespace

CohortSummary cohort_summary(const Cohort& cohort) {
  std::vector<const SubjectRecord*> pd, healthy;
  for (const auto& s : cohort.subjects) {
    (s.diagnosis == Diagnosis::PD ? pd : healthy).push_back(&s);
  }
  if (pd.empty()) raise(Err::EmptyGroup, "PD");
  if (healthy.empty()) raise(Err::EmptyGroup, "H");
  CohortSummary summary;
  summary.pd = summarize_group(pd);
  summary.healthy = summarize_group(healthy);
  return summary;
}

}  // namespace pdhw
