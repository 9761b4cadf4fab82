#include "bifeedback/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "bifeedback/errors.hpp"

namespace bifeedback {

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw IoError(path.string(), "cannot open checkpoint");
  }

  std::istringstream line() {
    std::string text;
    if (!std::getline(in_, text)) fail("unexpected end of file");
    ++line_no_;
    return std::istringstream(text);
  }

  void expect(std::istringstream& ss, const std::string& word) {
    std::string got;
    if (!(ss >> got) || got != word) fail("expected '" + word + "'");
  }

  void expect_eof() {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_no_;
      if (text.find_first_not_of(" \t\r") != std::string::npos) fail("trailing content");
    }
  }

  template <class T>
  T read(std::istringstream& ss) {
    T v{};
    if (!(ss >> v)) fail("bad value");
    return v;
  }

  double read_double(std::istringstream& ss) {
    std::string tok;
    if (!(ss >> tok)) fail("missing value");
    return parse_double(tok);
  }

  double parse_double(const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail("bad number '" + tok + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError(path_.string(), "line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const StudentPolicy& student,
                     const TeacherPolicy* teacher) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open checkpoint for writing");

  const StudentConfig& c = student.config();
  out << "bifeedback-checkpoint " << kCheckpointVersion << '\n';
  out << "grid " << student.indexer().width() << ' ' << student.indexer().height() << '\n';
  out << "student " << hex(c.alpha) << ' ' << hex(c.gamma) << ' ' << hex(c.epsilon_start) << ' '
      << hex(c.epsilon_end) << ' ' << hex(c.epsilon_decay_fraction) << '\n';

  const auto& v = student.v_table();
  std::size_t nonzero = 0;
  for (double x : v) nonzero += x != 0.0;
  out << "v " << nonzero << '\n';
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (v[s] != 0.0) out << s << ' ' << hex(v[s]) << '\n';
  }

  const auto& q = student.q_table();
  nonzero = 0;
  for (double x : q) nonzero += x != 0.0;
  out << "q " << nonzero << '\n';
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    const std::size_t a = i % kNumActions;
    const std::size_t x = (i / kNumActions) % kVocabSize;
    const std::size_t s = i / (kNumActions * kVocabSize);
    out << s << ' ' << x << ' ' << a << ' ' << hex(q[i]) << '\n';
  }

  if (teacher == nullptr) {
    out << "teacher none\n";
  } else {
    out << "teacher " << hex(teacher->config().beta) << ' ' << hex(teacher->config().temperature)
        << '\n';
    const auto& logits = teacher->logits();
    out << "logits " << logits.size() << '\n';
    for (std::size_t i = 0; i < logits.size(); ++i) {
      out << i / kVocabSize << ' ' << i % kVocabSize << ' ' << hex(logits[i]) << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError(path.string(), "write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);

  auto header = r.line();
  r.expect(header, "bifeedback-checkpoint");
  if (const int version = r.read<int>(header); version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }

  auto grid = r.line();
  r.expect(grid, "grid");
  const int width = r.read<int>(grid);
  const int height = r.read<int>(grid);
  if (width < 4 || height < 4 || width > 1024 || height > 1024) r.fail("bad grid size");

  auto sline = r.line();
  r.expect(sline, "student");
  StudentConfig cfg;
  cfg.alpha = r.read_double(sline);
  cfg.gamma = r.read_double(sline);
  cfg.epsilon_start = r.read_double(sline);
  cfg.epsilon_end = r.read_double(sline);
  cfg.epsilon_decay_fraction = r.read_double(sline);
  std::optional<StudentPolicy> student;
  try {
    student.emplace(StateIndexer(width, height), cfg);
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }

  auto vline = r.line();
  r.expect(vline, "v");
  const auto nv = r.read<std::size_t>(vline);
  for (std::size_t i = 0; i < nv; ++i) {
    auto l = r.line();
    const auto s = r.read<std::size_t>(l);
    if (s >= student->num_states()) r.fail("state out of range");
    student->v(static_cast<StateKey>(s)) = r.read_double(l);
  }

  auto qline = r.line();
  r.expect(qline, "q");
  const auto nq = r.read<std::size_t>(qline);
  for (std::size_t i = 0; i < nq; ++i) {
    auto l = r.line();
    const auto s = r.read<std::size_t>(l);
    const auto x = r.read<int>(l);
    const auto a = r.read<int>(l);
    if (s >= student->num_states() || x < 0 || x >= kVocabSize || a < 0 || a >= kNumActions) {
      r.fail("q entry out of range");
    }
    student->q(static_cast<StateKey>(s), static_cast<Token>(x), static_cast<Action>(a)) =
        r.read_double(l);
  }

  Checkpoint cp{std::move(*student), std::nullopt};
  auto tline = r.line();
  r.expect(tline, "teacher");
  const auto first = r.read<std::string>(tline);
  if (first != "none") {
    TeacherConfig tc;
    tc.beta = r.parse_double(first);
    tc.temperature = r.read_double(tline);
    try {
      cp.teacher.emplace(tc);
    } catch (const ConfigError& e) {
      r.fail(e.what());
    }
    auto lline = r.line();
    r.expect(lline, "logits");
    const auto nl = r.read<std::size_t>(lline);
    for (std::size_t i = 0; i < nl; ++i) {
      auto l = r.line();
      const auto c = r.read<int>(l);
      const auto x = r.read<int>(l);
      if (c < 0 || c >= kNumContexts || x < 0 || x >= kVocabSize) r.fail("logit out of range");
      cp.teacher->set_logit(context_from_index(c), static_cast<Token>(x), r.read_double(l));
    }
  }
  auto end = r.line();
  r.expect(end, "end");
  r.expect_eof();
  return cp;
}

}  // namespace bifeedback
