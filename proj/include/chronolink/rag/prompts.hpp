// Copyright 2026 The Chronolink Authors
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

// Prompt templates for the QA variants and the dataset-construction prompts,
// plus single-pass placeholder substitution.

#ifndef CHRONOLINK_RAG_PROMPTS_HPP_
#define CHRONOLINK_RAG_PROMPTS_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

enum class PromptVariant { kLlm, kLlmEr, kRalm, kRalmCot, kRalmEr };

inline constexpr PromptVariant kAllPromptVariants[] = {
    PromptVariant::kLlm, PromptVariant::kLlmEr, PromptVariant::kRalm,
    PromptVariant::kRalmCot, PromptVariant::kRalmEr};

inline std::string_view VariantName(PromptVariant v) {
  switch (v) {
    case PromptVariant::kLlm: return "LLM";
    case PromptVariant::kLlmEr: return "LLM-ER";
    case PromptVariant::kRalm: return "RaLM";
    case PromptVariant::kRalmCot: return "RaLM-CoT";
    case PromptVariant::kRalmEr: return "RaLM-ER";
  }
  return "";
}

inline absl::StatusOr<PromptVariant> ParseVariant(std::string_view name) {
  for (PromptVariant v : kAllPromptVariants) {
    if (VariantName(v) == name) return v;
  }
  return absl::InvalidArgumentError(StrCat("unknown prompt variant ", name));
}

inline bool UsesRetrieval(PromptVariant v) {
  return v == PromptVariant::kRalm || v == PromptVariant::kRalmCot ||
         v == PromptVariant::kRalmEr;
}

inline bool UsesResolution(PromptVariant v) {
  return v == PromptVariant::kLlmEr || v == PromptVariant::kRalmEr;
}

namespace prompts {

inline constexpr std::string_view kLlm =
    "Given a question, please provide a short answer.\n"
    "Question: {question}\n"
    "Answer:";

inline constexpr std::string_view kLlmEr =
    "The mention {mention} may also be referred to as {entity}. "
    "Given a question, please provide a short answer.\n"
    "Question: {question}\n"
    "Answer:";

inline constexpr std::string_view kRalm =
    "Context: {context}\n"
    "Given a question, please provide a short answer.\n"
    "Question: {question}\n"
    "Answer:";

inline constexpr std::string_view kRalmCotFirst =
    "Context: {context}\n"
    "Question: {question} {mention} is";

inline constexpr std::string_view kRalmCotSecond =
    "Context: {context}\n"
    "Question: {question} {mention} is {first_answer}.\n"
    "Answer:";

inline constexpr std::string_view kRalmEr =
    "Context: {context}\n"
    "The mention {mention} may also be referred to as {entity}. "
    "Given a question, please provide a short answer.\n"
    "Question: {question}\n"
    "Answer:";

inline constexpr std::string_view kFilterAmbiguous =
    "Provided List: {mention_list}\n"
    "\n"
    "The provided list is a compilation of mentions identified in the textual "
    "corpora. Upon human verification, these mentions refer to {entity} in the "
    "text.\n"
    "Select the mentions from the list that unambiguously refer to  without "
    "context.\n"
    "Unambiguous mentions are mentions that exclusively refer to the specified "
    "entity ({entity}) without requiring additional context.\n"
    "\n"
    "Examples:\n"
    " Unambiguous Mentions for Manchester_United_F.C.: “Man Utd”, "
    "“20-time English champions”, “the Red Devils club”, "
    "...\n"
    " Ambiguous Mentions for Manchester_United_F.C.: “United”, "
    "“chaos club”, “English Powerhouse”, “the First "
    "Team”, ...\n"
    "\n"
    "Instructions:\n"
    " 1) Write mentions exactly as they appear in the provided list. Do not "
    "modify the mentions in the list, even if they contain typos. Maintain the "
    "original capitalization and spacing.\n"
    " 2) Be sure to follow the following format and write your answer within "
    "the list: [“Mention 1”, “Mention 2”, ... ]";

inline constexpr std::string_view kGenerateQa =
    "Generate a Q&A pair about [{entity}] based on a given context. The "
    "context will provide factual information about [{entity}].\n"
    "Assume the person answering the question has common sense and is aware "
    "of the details and key points in the context, but the context itself is "
    "not quoted or referenced directly.\n"
    "\n"
    "Context: {context}\n"
    "\n"
    "Follow these instructions to generate a Q&A pair:\n"
    " 1) Provide a question and an answer.\n"
    " 2) Bracket the corresponding Entity ([{entity}]) in the Question, like "
    "the sample Q&A pair given below.\n"
    " 3) Do NOT use phrases such as ‘according to the context’ in "
    "your question.\n"
    " 4) Generate a SINGLE Q&A pair.\n"
    " 5) Provide a SHORT ANSWER.\n"
    "\n"
    "Write your Q&A pair within curly brackets using the following format: "
    "{{Question}}{{Answer}}\n"
    "\n"
    "Sample Q&A pair : {{Where was [Lionel_Messi] born?}}{{Lionel Messi was "
    "born in Rosario, Argentina.}}";

inline constexpr std::string_view kVerifyMention =
    "The provided mention {mention} refers to {entity} in the text.\n"
    "Please determine whether the mention unambiguously refer to {entity} "
    "without context.";

}  // namespace prompts

struct TemplateAsset {
  std::string_view file;
  std::string_view text;
};

inline constexpr TemplateAsset kTemplateAssets[] = {
    {"llm.txt", prompts::kLlm},
    {"llm_er.txt", prompts::kLlmEr},
    {"ralm.txt", prompts::kRalm},
    {"ralm_cot_first.txt", prompts::kRalmCotFirst},
    {"ralm_cot_second.txt", prompts::kRalmCotSecond},
    {"ralm_er.txt", prompts::kRalmEr},
    {"filter_ambiguous.txt", prompts::kFilterAmbiguous},
    {"generate_qa.txt", prompts::kGenerateQa},
    {"verify_mention.txt", prompts::kVerifyMention},
};

using TemplateFields = std::map<std::string, std::string, std::less<>>;

// "{name}" is a placeholder when name is [a-z_]+; "{{" and "}}" are literal
// braces. Substituted values are never rescanned.
inline absl::StatusOr<std::string> FillTemplate(std::string_view tmpl,
                                                const TemplateFields& fields) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
      out.push_back(c);
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && (tmpl[j] == '_' || (tmpl[j] >= 'a' &&
                                                     tmpl[j] <= 'z'))) {
        ++j;
      }
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        const std::string_view name = tmpl.substr(i + 1, j - i - 1);
        auto it = fields.find(name);
        if (it == fields.end()) {
          return absl::InvalidArgumentError(
              StrCat("missing template field ", name));
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

struct PromptInputs {
  std::string question;
  std::optional<std::string> mention;
  std::optional<std::string> entity;
  std::optional<std::vector<std::string>> context_chunks;
};

// Chunks in rank order, one newline between them.
inline std::string JoinContext(const std::vector<std::string>& chunks) {
  return StrJoin(chunks, "\n");
}

namespace internal {

inline absl::Status Require(bool present, std::string_view field,
                            PromptVariant v) {
  if (present) return absl::OkStatus();
  return absl::InvalidArgumentError(
      StrCat(VariantName(v), " prompt requires ", field));
}

}  // namespace internal

// For RaLM-CoT this is the first-stage prompt.
inline absl::StatusOr<std::string> BuildPrompt(PromptVariant variant,
                                               const PromptInputs& in) {
  TemplateFields fields{{"question", in.question}};
  const bool er = UsesResolution(variant);
  const bool rag = UsesRetrieval(variant);
  if (er || variant == PromptVariant::kRalmCot) {
    RETURN_IF_ERROR(internal::Require(in.mention.has_value(), "mention",
                                      variant));
    fields["mention"] = *in.mention;
  }
  if (er) {
    RETURN_IF_ERROR(internal::Require(in.entity.has_value(), "entity",
                                      variant));
    fields["entity"] = *in.entity;
  }
  if (rag) {
    RETURN_IF_ERROR(internal::Require(in.context_chunks.has_value(),
                                      "context", variant));
    fields["context"] = JoinContext(*in.context_chunks);
  }
  switch (variant) {
    case PromptVariant::kLlm: return FillTemplate(prompts::kLlm, fields);
    case PromptVariant::kLlmEr: return FillTemplate(prompts::kLlmEr, fields);
    case PromptVariant::kRalm: return FillTemplate(prompts::kRalm, fields);
    case PromptVariant::kRalmCot:
      return FillTemplate(prompts::kRalmCotFirst, fields);
    case PromptVariant::kRalmEr: return FillTemplate(prompts::kRalmEr, fields);
  }
  return absl::InternalError("unreachable");
}

inline absl::StatusOr<std::string> BuildCotSecondPrompt(
    const PromptInputs& in, std::string_view first_answer) {
  RETURN_IF_ERROR(internal::Require(in.mention.has_value(), "mention",
                                    PromptVariant::kRalmCot));
  RETURN_IF_ERROR(internal::Require(in.context_chunks.has_value(), "context",
                                    PromptVariant::kRalmCot));
  return FillTemplate(prompts::kRalmCotSecond,
                      {{"question", in.question},
                       {"mention", *in.mention},
                       {"context", JoinContext(*in.context_chunks)},
                       {"first_answer", std::string(first_answer)}});
}

inline absl::StatusOr<std::string> BuildFilterAmbiguousPrompt(
    const std::vector<std::string>& mentions, std::string_view entity) {
  std::vector<std::string> quoted;
  for (const std::string& m : mentions) {
    quoted.push_back(StrCat("“", m, "”"));
  }
  return FillTemplate(prompts::kFilterAmbiguous,
                      {{"mention_list", StrCat("[", StrJoin(quoted, ", "), "]")},
                       {"entity", std::string(entity)}});
}

inline absl::StatusOr<std::string> BuildGenerateQaPrompt(
    std::string_view entity, std::string_view context) {
  return FillTemplate(prompts::kGenerateQa,
                      {{"entity", std::string(entity)},
                       {"context", std::string(context)}});
}

inline absl::StatusOr<std::string> BuildVerifyMentionPrompt(
    std::string_view mention, std::string_view entity) {
  return FillTemplate(prompts::kVerifyMention,
                      {{"mention", std::string(mention)},
                       {"entity", std::string(entity)}});
}

struct QaGenParse {
  std::string question;
  std::string answer;
  std::vector<std::string> warnings;
};

// Extracts the first two top-level {...} groups of a generated reply.
inline absl::StatusOr<QaGenParse> ParseQaGen(std::string_view text) {
  std::vector<std::string> groups;
  std::size_t open = std::string_view::npos;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      if (open != std::string_view::npos) {
        return absl::InvalidArgumentError(
            StrCat("nested brace at byte ", i));
      }
      open = i;
    } else if (text[i] == '}') {
      if (open == std::string_view::npos) {
        return absl::InvalidArgumentError(
            StrCat("unbalanced closing brace at byte ", i));
      }
      groups.emplace_back(text.substr(open + 1, i - open - 1));
      open = std::string_view::npos;
    }
  }
  if (open != std::string_view::npos) {
    return absl::InvalidArgumentError(
        StrCat("unbalanced opening brace at byte ", open));
  }
  if (groups.size() < 2) {
    return absl::InvalidArgumentError(
        StrCat("expected two brace groups, found ", groups.size()));
  }
  QaGenParse out{groups[0], groups[1], {}};
  if (groups.size() > 2) {
    out.warnings.push_back(StrCat("ignored ", groups.size() - 2,
                                  " extra brace group(s)"));
  }
  return out;
}

// Replaces the single bracketed entity name of a generated question.
inline absl::StatusOr<std::string> SubstituteMention(
    std::string_view question, std::string_view mention) {
  const std::size_t open = question.find('[');
  const std::size_t close =
      open == std::string_view::npos ? open : question.find(']', open);
  if (close == std::string_view::npos) {
    return absl::InvalidArgumentError("question has no bracketed entity");
  }
  if (question.find('[', close) != std::string_view::npos) {
    return absl::InvalidArgumentError(
        "question has more than one bracketed entity");
  }
  return StrCat(question.substr(0, open), mention, question.substr(close + 1));
}

}  // namespace chronolink

#endif  // CHRONOLINK_RAG_PROMPTS_HPP_
