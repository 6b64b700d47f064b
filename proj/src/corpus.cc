/* Copyright 2026 The ArgStruct Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "argstruct/corpus.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "argstruct/error.h"

namespace argstruct {

const char *TaskName(Task task) {
  return task == Task::kPasa ? "PASA" : "ENASA";
}

const char *CaseName(CaseLabel label) {
  switch (label) {
    case CaseLabel::kNom:
      return "NOM";
    case CaseLabel::kAcc:
      return "ACC";
    case CaseLabel::kDat:
      return "DAT";
    case CaseLabel::kElse:
      return "ELSE";
  }
  return "?";
}

const char *CategoryName(Category category) {
  switch (category) {
    case Category::kDep:
      return "Dep";
    case Category::kZero:
      return "Zero";
    case Category::kInterZero:
      return "InterZero";
    case Category::kBunsetsu:
      return "Bunsetsu";
  }
  return "?";
}

std::optional<CaseLabel> ParseCase(std::string_view name) {
  if (name == "NOM") return CaseLabel::kNom;
  if (name == "ACC") return CaseLabel::kAcc;
  if (name == "DAT") return CaseLabel::kDat;
  return std::nullopt;
}

std::optional<Task> ParseTask(std::string_view name) {
  if (name == "PASA" || name == "pasa") return Task::kPasa;
  if (name == "ENASA" || name == "enasa") return Task::kEnasa;
  return std::nullopt;
}

namespace {

std::vector<std::string_view> Split(std::string_view text, char delim) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<int> ParseInt(std::string_view text) {
  int value = 0;
  if (text.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool ValidId(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == ';' || c == '=' || c == ':' || c == ' ' || c == '\t') return false;
  }
  return true;
}

struct PendingArg {
  int token;
  CaseLabel label;
  std::string instance_id;
  int line;
};

// Accumulates one sentence and validates it on Finish().
class SentenceBuilder {
 public:
  SentenceBuilder(int dep_line, std::vector<int> heads)
      : dep_line_(dep_line), heads_(std::move(heads)) {}

  void AddToken(std::string_view line_text, int line) {
    std::vector<std::string_view> fields = Split(line_text, '\t');
    if (fields.size() != 5) {
      throw ParseError(line, "expected 5 tab-separated fields, got " +
                                 std::to_string(fields.size()));
    }
    std::optional<int> index = ParseInt(fields[0]);
    if (!index) throw ParseError(line, "bad token index '" + std::string(fields[0]) + "'");
    const int expected = static_cast<int>(sentence_.tokens.size());
    if (*index < expected) {
      throw ParseError(line, "duplicate token index " + std::to_string(*index));
    }
    if (*index != expected) {
      throw ParseError(line, "token index " + std::to_string(*index) +
                                 " out of sequence; expected " +
                                 std::to_string(expected));
    }
    Token token;
    token.index = *index;
    token.surface = std::string(fields[1]);
    if (token.surface.empty()) throw ParseError(line, "empty surface");

    std::optional<int> bunsetsu = ParseInt(fields[2]);
    if (!bunsetsu) throw ParseError(line, "bad bunsetsu index '" + std::string(fields[2]) + "'");
    const int previous =
        sentence_.tokens.empty() ? -1 : sentence_.tokens.back().bunsetsu_index;
    if (*bunsetsu != previous && *bunsetsu != previous + 1) {
      throw ParseError(line, "bunsetsu index " + std::to_string(*bunsetsu) +
                                 " must follow " + std::to_string(previous) +
                                 " or increment it by one");
    }
    token.bunsetsu_index = *bunsetsu;

    std::string_view marker = fields[3];
    if (marker == "_") {
      token.marker = Marker::kNone;
    } else if (marker == "VN") {
      token.marker = Marker::kVerbalNoun;
    } else {
      size_t colon = marker.find(':');
      std::string_view kind = marker.substr(0, colon);
      if (colon == std::string_view::npos || (kind != "PRED" && kind != "EVENT")) {
        throw ParseError(line, "bad marker '" + std::string(marker) + "'");
      }
      std::string_view id = marker.substr(colon + 1);
      if (!ValidId(id)) throw ParseError(line, "bad instance id '" + std::string(id) + "'");
      token.marker = kind == "PRED" ? Marker::kPredicate : Marker::kEventNoun;
      token.marker_id = std::string(id);
      marker_lines_.push_back(line);
    }

    std::string_view args = fields[4];
    if (args != "_") {
      for (std::string_view item : Split(args, ';')) {
        size_t eq = item.find('=');
        if (eq == std::string_view::npos) {
          throw ParseError(line, "bad argument '" + std::string(item) + "'");
        }
        std::optional<CaseLabel> label = ParseCase(item.substr(0, eq));
        if (!label) {
          throw ParseError(line, "unknown case label '" +
                                     std::string(item.substr(0, eq)) + "'");
        }
        std::string_view id = item.substr(eq + 1);
        if (!ValidId(id)) throw ParseError(line, "bad instance id '" + std::string(id) + "'");
        pending_.push_back({token.index, *label, std::string(id), line});
      }
    }
    sentence_.tokens.push_back(std::move(token));
  }

  bool empty() const { return sentence_.tokens.empty(); }

  Sentence Finish(std::set<std::string> &document_ids) {
    if (sentence_.tokens.empty()) throw ParseError(dep_line_, "sentence has no tokens");
    const int num_bunsetsu = sentence_.tokens.back().bunsetsu_index + 1;
    if (num_bunsetsu != static_cast<int>(heads_.size())) {
      throw ParseError(dep_line_, "#DEP lists " + std::to_string(heads_.size()) +
                                      " heads but tokens use " +
                                      std::to_string(num_bunsetsu) + " bunsetsu");
    }
    int roots = 0;
    for (int b = 0; b < num_bunsetsu; ++b) {
      const int head = heads_[b];
      if (head == kRootHead) {
        ++roots;
      } else if (head < 0 || head >= num_bunsetsu || head == b) {
        throw ParseError(dep_line_, "bunsetsu " + std::to_string(b) +
                                        " has invalid head " + std::to_string(head));
      }
    }
    if (roots != 1) {
      throw ParseError(dep_line_, "expected exactly one ROOT, found " + std::to_string(roots));
    }
    for (int b = 0; b < num_bunsetsu; ++b) {
      int steps = 0;
      for (int cur = b; cur != kRootHead; cur = heads_[cur]) {
        if (++steps > num_bunsetsu) {
          throw ParseError(dep_line_, "dependency cycle through bunsetsu " + std::to_string(b));
        }
      }
    }
    sentence_.bunsetsu.resize(num_bunsetsu);
    for (int b = 0; b < num_bunsetsu; ++b) {
      sentence_.bunsetsu[b].index = b;
      sentence_.bunsetsu[b].head = heads_[b];
      sentence_.bunsetsu[b].begin = -1;
    }
    for (const Token &token : sentence_.tokens) {
      Bunsetsu &chunk = sentence_.bunsetsu[token.bunsetsu_index];
      if (chunk.begin < 0) chunk.begin = token.index;
      chunk.end = token.index + 1;
    }

    std::map<std::string, size_t> local;
    size_t marker_no = 0;
    for (const Token &token : sentence_.tokens) {
      if (token.marker != Marker::kPredicate && token.marker != Marker::kEventNoun) continue;
      const int line = marker_lines_[marker_no++];
      if (document_ids.count(token.marker_id)) {
        throw ParseError(line, "duplicate instance id '" + token.marker_id + "'");
      }
      TargetInstance instance;
      instance.id = token.marker_id;
      instance.task = token.marker == Marker::kPredicate ? Task::kPasa : Task::kEnasa;
      instance.trigger_token = token.index;
      instance.marked_token = token.index;
      local[instance.id] = sentence_.instances.size();
      sentence_.instances.push_back(std::move(instance));
    }
    for (const PendingArg &arg : pending_) {
      auto it = local.find(arg.instance_id);
      if (it == local.end()) {
        if (document_ids.count(arg.instance_id)) {
          throw ParseError(arg.line, "inter-sentence argument reference to '" +
                                         arg.instance_id + "' is not supported");
        }
        throw ParseError(arg.line, "dangling instance id reference '" + arg.instance_id + "'");
      }
      TargetInstance &instance = sentence_.instances[it->second];
      if (arg.token == instance.trigger_token) {
        throw ParseError(arg.line, "token is an argument of its own trigger '" +
                                       arg.instance_id + "'");
      }
      for (const Argument &existing : instance.gold_args) {
        if (existing.token == arg.token) {
          throw ParseError(arg.line, "token has two case labels for instance '" +
                                         arg.instance_id + "'");
        }
      }
      instance.gold_args.push_back({arg.token, arg.label});
    }
    for (const TargetInstance &instance : sentence_.instances) {
      document_ids.insert(instance.id);
    }
    return std::move(sentence_);
  }

 private:
  int dep_line_;
  std::vector<int> heads_;
  Sentence sentence_;
  std::vector<PendingArg> pending_;
  std::vector<int> marker_lines_;
};

}  // namespace

Corpus ParseCorpus(std::istream &input) {
  Corpus corpus;
  std::set<std::string> document_ids;
  std::set<std::string> seen_docs;
  std::optional<SentenceBuilder> builder;
  std::string raw;
  int line_no = 0;

  auto finish_sentence = [&]() {
    if (!builder) return;
    corpus.back().sentences.push_back(builder->Finish(document_ids));
    builder.reset();
  };

  while (std::getline(input, raw)) {
    ++line_no;
    std::string_view line(raw);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      finish_sentence();
      continue;
    }
    if (line.rfind("#DOC", 0) == 0) {
      if (builder) throw ParseError(line_no, "#DOC inside a sentence; end it with a blank line");
      if (line.size() < 6 || line[4] != ' ') throw ParseError(line_no, "#DOC needs an id");
      std::string id(line.substr(5));
      if (!ValidId(id)) throw ParseError(line_no, "bad document id '" + id + "'");
      if (!seen_docs.insert(id).second) throw ParseError(line_no, "duplicate document id '" + id + "'");
      corpus.push_back(Document{id, {}});
      document_ids.clear();
      continue;
    }
    if (line.rfind("#DEP", 0) == 0) {
      if (builder) throw ParseError(line_no, "#DEP inside a sentence; end it with a blank line");
      if (corpus.empty()) throw ParseError(line_no, "#DEP before any #DOC");
      std::vector<int> heads;
      std::istringstream fields{std::string(line.substr(4))};
      std::string field;
      while (fields >> field) {
        std::optional<int> head = ParseInt(field);
        if (!head) throw ParseError(line_no, "bad head '" + field + "'");
        heads.push_back(*head);
      }
      if (heads.empty()) throw ParseError(line_no, "#DEP lists no heads");
      builder.emplace(line_no, std::move(heads));
      continue;
    }
    if (line.front() == '#') {
      throw ParseError(line_no, "unknown directive '" + std::string(line) + "'");
    }
    if (!builder) throw ParseError(line_no, "token line outside a sentence (missing #DEP)");
    builder->AddToken(line, line_no);
  }
  finish_sentence();
  return corpus;
}

Corpus ParseCorpusString(std::string_view text) {
  std::istringstream input{std::string(text)};
  return ParseCorpus(input);
}

Corpus ReadCorpusFile(const std::string &path) {
  std::ifstream input(path);
  if (!input) throw Error("cannot open corpus file '" + path + "'");
  try {
    return ParseCorpus(input);
  } catch (const ParseError &e) {
    throw e.InFile(path);
  }
}

std::string SerializeCorpus(const Corpus &corpus) {
  std::ostringstream out;
  for (const Document &doc : corpus) {
    out << "#DOC " << doc.id << '\n';
    for (const Sentence &sentence : doc.sentences) {
      out << "#DEP";
      for (const Bunsetsu &chunk : sentence.bunsetsu) out << ' ' << chunk.head;
      out << '\n';
      std::vector<std::vector<std::string>> args(sentence.tokens.size());
      std::vector<std::string> markers(sentence.tokens.size());
      for (const TargetInstance &instance : sentence.instances) {
        markers[instance.marked_token] =
            std::string(instance.task == Task::kPasa ? "PRED:" : "EVENT:") + instance.id;
        std::vector<Argument> all = instance.gold_args;
        all.insert(all.end(), instance.demoted_args.begin(), instance.demoted_args.end());
        for (const Argument &arg : all) {
          args[arg.token].push_back(std::string(CaseName(arg.label)) + "=" + instance.id);
        }
      }
      for (const Token &token : sentence.tokens) {
        std::string marker = markers[token.index];
        if (marker.empty()) marker = token.marker == Marker::kVerbalNoun ? "VN" : "_";
        out << token.index << '\t' << token.surface << '\t' << token.bunsetsu_index
            << '\t' << marker << '\t';
        if (args[token.index].empty()) {
          out << '_';
        } else {
          for (size_t i = 0; i < args[token.index].size(); ++i) {
            if (i) out << ';';
            out << args[token.index][i];
          }
        }
        out << '\n';
      }
      out << '\n';
    }
  }
  return out.str();
}

void WriteCorpusFile(const Corpus &corpus, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << SerializeCorpus(corpus);
}

std::string DumpCorpus(const Corpus &corpus) {
  std::ostringstream out;
  for (const Document &doc : corpus) {
    out << "DOC " << doc.id << " sentences=" << doc.sentences.size() << '\n';
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const Sentence &sentence = doc.sentences[s];
      out << "SENT " << s << " tokens=" << sentence.tokens.size()
          << " bunsetsu=" << sentence.bunsetsu.size() << '\n';
      for (const Bunsetsu &chunk : sentence.bunsetsu) {
        out << "  B " << chunk.index << " [" << chunk.begin << "," << chunk.end
            << ") head=" << chunk.head << '\n';
      }
      for (const Token &token : sentence.tokens) {
        out << "  T " << token.index << ' ' << token.surface << " b=" << token.bunsetsu_index;
        if (token.marker == Marker::kVerbalNoun) out << " VN";
        out << '\n';
      }
      for (const TargetInstance &instance : sentence.instances) {
        out << "  I " << instance.id << ' ' << TaskName(instance.task)
            << " marked=" << instance.marked_token << " trigger=" << instance.trigger_token;
        for (const Argument &arg : instance.gold_args) {
          out << ' ' << arg.token << ':' << CaseName(arg.label) << ':'
              << CategoryName(ClassifyArgumentCategory(sentence, instance, arg.token));
        }
        for (const Argument &arg : instance.demoted_args) {
          out << " demoted=" << arg.token << ':' << CaseName(arg.label);
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

std::vector<std::string> DefaultLightVerbs() { return {"する", "し", "さ", "せ"}; }

Sentence MergeSuru(const Sentence &sentence, const std::vector<std::string> &light_verbs) {
  Sentence merged = sentence;
  for (TargetInstance &instance : merged.instances) {
    if (instance.task != Task::kPasa) continue;
    const int trigger = instance.trigger_token;
    const Token &token = merged.tokens[trigger];
    if (std::find(light_verbs.begin(), light_verbs.end(), token.surface) == light_verbs.end()) {
      continue;
    }
    if (trigger == 0) continue;
    const Token &previous = merged.tokens[trigger - 1];
    if (previous.bunsetsu_index != token.bunsetsu_index) continue;
    if (previous.marker != Marker::kVerbalNoun) continue;
    // The verbal noun may itself be annotated as an argument of the light
    // verb; the token cannot be both trigger and argument.
    bool is_own_arg = std::any_of(instance.gold_args.begin(), instance.gold_args.end(),
                                  [&](const Argument &a) { return a.token == trigger - 1; });
    if (is_own_arg) continue;
    instance.trigger_token = trigger - 1;
  }
  return merged;
}

namespace {

bool DirectlyLinked(const Sentence &sentence, int a_token, int b_token) {
  const int a = sentence.BunsetsuOf(a_token);
  const int b = sentence.BunsetsuOf(b_token);
  if (a == b) return false;
  return sentence.bunsetsu[a].head == b || sentence.bunsetsu[b].head == a;
}

}  // namespace

Category ClassifyArgumentCategory(const Sentence &sentence, const TargetInstance &instance,
                                  int arg_token) {
  if (arg_token < 0 || arg_token >= sentence.size()) {
    throw Error("argument token " + std::to_string(arg_token) + " out of range");
  }
  const int trigger = instance.trigger_token;
  if (sentence.BunsetsuOf(arg_token) == sentence.BunsetsuOf(trigger)) {
    return Category::kBunsetsu;
  }
  if (DirectlyLinked(sentence, arg_token, trigger)) return Category::kDep;
  return Category::kZero;
}

TargetInstance ResolveUniqueArguments(const Sentence &sentence, const TargetInstance &instance) {
  TargetInstance resolved = instance;
  resolved.gold_args.clear();
  const int trigger = instance.trigger_token;
  // Sort key: (not dep-linked, distance, right of trigger).
  auto key = [&](const Argument &arg) {
    const bool linked = DirectlyLinked(sentence, arg.token, trigger);
    return std::make_tuple(!linked, std::abs(arg.token - trigger), arg.token > trigger);
  };
  for (int c = 0; c < kNumCases; ++c) {
    const CaseLabel label = static_cast<CaseLabel>(c);
    std::optional<Argument> best;
    for (const Argument &arg : instance.gold_args) {
      if (arg.label != label) continue;
      if (!best || key(arg) < key(*best)) {
        if (best) resolved.demoted_args.push_back(*best);
        best = arg;
      } else {
        resolved.demoted_args.push_back(arg);
      }
    }
    if (best) resolved.gold_args.push_back(*best);
  }
  // Keep the file order of surviving arguments.
  std::vector<Argument> ordered;
  for (const Argument &arg : instance.gold_args) {
    if (std::find(resolved.gold_args.begin(), resolved.gold_args.end(), arg) !=
        resolved.gold_args.end()) {
      ordered.push_back(arg);
    }
  }
  resolved.gold_args = std::move(ordered);
  std::sort(resolved.demoted_args.begin(), resolved.demoted_args.end(),
            [](const Argument &a, const Argument &b) { return a.token < b.token; });
  return resolved;
}

std::vector<CaseLabel> GoldLabels(const Sentence &sentence, const TargetInstance &instance) {
  std::vector<CaseLabel> labels(sentence.tokens.size(), CaseLabel::kElse);
  for (const Argument &arg : instance.gold_args) labels[arg.token] = arg.label;
  return labels;
}

Corpus Preprocess(const Corpus &corpus, const PreprocessOptions &options) {
  Corpus out = corpus;
  for (Document &doc : out) {
    for (Sentence &sentence : doc.sentences) {
      sentence = MergeSuru(sentence, options.light_verbs);
      if (options.resolve_unique) {
        for (TargetInstance &instance : sentence.instances) {
          instance = ResolveUniqueArguments(sentence, instance);
        }
      }
    }
  }
  return out;
}

int CountInstances(const Corpus &corpus, Task task) {
  int count = 0;
  for (const Document &doc : corpus) {
    for (const Sentence &sentence : doc.sentences) {
      for (const TargetInstance &instance : sentence.instances) {
        if (instance.task == task) ++count;
      }
    }
  }
  return count;
}

}  // namespace argstruct
