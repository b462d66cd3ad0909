#include "revmetrics/extraction/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "revmetrics/core/similarity.hpp"
#include "revmetrics/error.hpp"

namespace revmetrics::extraction {

namespace {

using nlohmann::json;
using retrieval::ChatRequest;
using retrieval::LlmClient;

std::string lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::string trim(const std::string &text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    return text.substr(first, text.find_last_not_of(" \t\r\n") - first + 1);
}

std::string join(const std::vector<std::string> &parts, const std::string &sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
        out += (i ? sep : "") + parts[i];
    return out;
}

bool is_letter(char32_t c) {
    if (c < 0x80)
        return std::isalpha(static_cast<int>(c)) != 0;
    if (c == U'×' || c == U'÷')
        return false;
    // Latin-1 letters onwards, minus general punctuation and symbol blocks
    if (c < 0xC0 || (c >= 0x2000 && c <= 0x2BFF) || (c >= 0x3000 && c <= 0x303F))
        return false;
    return true;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == U'’' || c == U'‘' || c == U'`'; }

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

std::string render_messages_user(const std::string &instruction, const std::string &payload) {
    return instruction + "\n\n" + payload;
}

ChatRequest json_request(const std::string &task, const std::string &instruction, const std::string &payload,
                         std::map<std::string, std::string> inputs) {
    ChatRequest request;
    request.task = task;
    request.messages.push_back(
        {"system", "You read excerpts of scholarly review articles and answer strictly with one JSON object, "
                   "without commentary."});
    request.messages.push_back({"user", render_messages_user(instruction, payload)});
    request.inputs = std::move(inputs);
    return request;
}

/// Sends the request, allowing one retry when the reply does not satisfy `accept`.
template <typename Accept>
auto complete_json(LlmClient &llm, const ChatRequest &request, Accept accept) {
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return accept(retrieval::parse_json_reply(llm.complete(request)));
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::MalformedResponse)
                throw;
            last_error = e.detail();
        }
    }
    throw Error(ErrorKind::MalformedResponse, request.task + " reply unusable after retry: " + last_error);
}

int binary_field(const json &reply, const std::string &name) {
    const auto it = reply.find(name);
    if (it == reply.end())
        throw Error(ErrorKind::MalformedResponse, "reply lacks '" + name + "'");
    if (it->is_boolean())
        return it->get<bool>() ? 1 : 0;
    if (it->is_number_integer() && (it->get<int>() == 0 || it->get<int>() == 1))
        return it->get<int>();
    throw Error(ErrorKind::MalformedResponse, "'" + name + "' must be 0 or 1, got " + it->dump());
}

std::vector<std::string> string_list(const json &reply, const std::string &name) {
    const auto it = reply.find(name);
    if (it == reply.end() || !it->is_array())
        throw Error(ErrorKind::MalformedResponse, "reply lacks array '" + name + "'");
    std::vector<std::string> out;
    for (const auto &item : *it) {
        if (!item.is_string())
            throw Error(ErrorKind::MalformedResponse, "'" + name + "' holds a non-string entry");
        out.push_back(item.get<std::string>());
    }
    return out;
}

const std::regex &caption_mention() {
    static const std::regex re(R"(\b(fig|figure|tab|table)s?\b)", std::regex::icase | std::regex::ECMAScript);
    return re;
}

const std::regex &caption_line() {
    static const std::regex re(R"(^\s*(fig\.?|figure|tab\.?|table)\s*([0-9]+|[ivxlc]+)\s*[:.|])",
                               std::regex::icase | std::regex::ECMAScript);
    return re;
}

const std::map<std::string, std::vector<std::string>> &default_cues() {
    static const std::map<std::string, std::vector<std::string>> cues{
        {"taxonomy", {"taxonomy", "categoriz", "categoris", "classification of", "we classify", "we group"}},
        {"prisma",
         {"prisma", "inclusion and exclusion criteria", "inclusion criteria", "exclusion criteria",
          "systematic literature review", "search strategy", "study selection", "screening"}},
        {"preliminary", {"preliminar", "background", "fundamental", "basic concept", "problem formulation",
                         "definitions", "notation"}},
        {"application", {"application"}},
        {"discussion", {"discussion", "future direction", "open problem", "open issue", "challenges",
                        "future work", "outlook"}},
        {"benchmark", {"benchmark", "comparison", "compared", "performance", "results on", "accuracy",
                       "evaluation", "state-of-the-art"}},
    };
    return cues;
}

std::vector<std::string> cues_for(const json &table, const std::string &feature) {
    if (const auto all = table.find("feature_cues"); all != table.end() && all->is_object())
        if (const auto mine = all->find(feature); mine != all->end() && mine->is_array())
            return mine->get<std::vector<std::string>>();
    return default_cues().at(feature);
}

int mentions_any(const std::string &text, const std::vector<std::string> &cues) {
    const std::string haystack = lower(text);
    for (const auto &cue : cues)
        if (!cue.empty() && haystack.find(lower(cue)) != std::string::npos)
            return 1;
    return 0;
}

std::string input(const ChatRequest &request, const std::string &key) {
    const auto it = request.inputs.find(key);
    return it == request.inputs.end() ? std::string{} : it->second;
}

int structured_abstract_stub(const std::string &abstract) {
    static const std::regex label(
        R"((?:^|[\n.;]\s*)(background|objectives?|aims?|purpose|introduction|methods?|methodology|design|results?|findings|conclusions?|significance)\s*:)",
        std::regex::icase | std::regex::ECMAScript);
    std::set<std::string> seen;
    for (auto it = std::sregex_iterator(abstract.begin(), abstract.end(), label); it != std::sregex_iterator(); ++it) {
        std::string name = lower((*it)[1].str());
        if (name.size() > 1 && name.back() == 's')
            name.pop_back();
        seen.insert(name);
    }
    return seen.size() >= 2 ? 1 : 0;
}

} // namespace

std::int64_t count_words(const std::string &text) {
    std::int64_t count = 0;
    std::istringstream in(text);
    for (std::string raw; in >> raw;) {
        const std::u32string token = core::decode_utf8(raw);
        std::size_t begin = 0, end = token.size();
        const auto edge = [](char32_t c) { return !is_letter(c) && !is_digit(c); };
        while (begin < end && edge(token[begin]))
            ++begin;
        while (end > begin && edge(token[end - 1]))
            --end;
        if (begin == end)
            continue;
        bool word = true;
        for (std::size_t i = begin; i < end && word; ++i) {
            const char32_t c = token[i];
            if (is_letter(c))
                continue;
            word = c == U'-' && i > begin && i + 1 < end && is_letter(token[i - 1]) && is_letter(token[i + 1]);
            if (is_digit(c) || is_apostrophe(c))
                word = false;
        }
        if (word)
            ++count;
    }
    return count;
}

std::vector<Chunk> chunk_text(const std::string &text) {
    std::vector<Chunk> chunks;
    if (text.empty())
        return chunks;
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        const auto nl = text.find('\n', start);
        lines.push_back(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        if (nl == std::string::npos)
            break;
        start = nl + 1;
    }
    std::string current;
    std::size_t current_len = 0;
    bool open = false;
    const auto flush = [&] {
        if (open)
            chunks.push_back({current, false});
        current.clear();
        current_len = 0;
        open = false;
    };
    for (const auto &line : lines) {
        const std::size_t len = core::decode_utf8(line).size();
        if (len > kMaxChunkCodePoints) {
            flush();
            chunks.push_back({line, true});
            continue;
        }
        if (open && current_len + 1 + len <= kMaxChunkCodePoints) {
            current += '\n';
            current += line;
            current_len += 1 + len;
            continue;
        }
        flush();
        current = line;
        current_len = len;
        open = true;
    }
    flush();
    return chunks;
}

std::vector<Chunk> filter_caption_chunks(const std::vector<Chunk> &chunks) {
    std::vector<Chunk> kept;
    for (const auto &chunk : chunks)
        if (std::regex_search(chunk.text, caption_mention()))
            kept.push_back(chunk);
    return kept;
}

Captions extract_captions(const std::vector<Chunk> &chunks, LlmClient &llm) {
    Captions out;
    for (const auto &chunk : chunks) {
        const auto request = json_request(
            "caption_extraction",
            "List every figure caption and every table caption that appears in the text below. Copy each caption "
            "verbatim. Ignore sentences that merely refer to a figure or table. Reply as "
            "{\"figures\": [\"...\"], \"tables\": [\"...\"]}.",
            chunk.text, {{"chunk", chunk.text}});
        auto found = complete_json(llm, request, [](const json &reply) {
            return Captions{string_list(reply, "figures"), string_list(reply, "tables")};
        });
        out.figures.insert(out.figures.end(), found.figures.begin(), found.figures.end());
        out.tables.insert(out.tables.end(), found.tables.begin(), found.tables.end());
    }
    return out;
}

snapshot::FeatureVector extract_features(const std::string &title, const std::string &abstract,
                                         const std::string &intro, const std::vector<std::string> &toc,
                                         const Captions &captions, LlmClient &llm) {
    snapshot::FeatureVector fv;
    const std::string toc_text = join(toc, "\n");
    const std::string heading = "Review title: " + title + "\n\n";

    if (!trim(intro).empty() || !trim(toc_text).empty()) {
        const auto request = json_request(
            "feature_taxonomy_prisma",
            "From the introduction and table of contents below, decide: taxonomy = 1 if the review proposes a "
            "taxonomy or categorization of the field; prisma = 1 if it follows a PRISMA-style systematic protocol "
            "(search strategy, inclusion/exclusion criteria, screening). Reply as {\"taxonomy\": 0|1, \"prisma\": 0|1}.",
            heading + "Introduction:\n" + intro + "\n\nTable of contents:\n" + toc_text,
            {{"intro", intro}, {"toc", toc_text}});
        complete_json(llm, request, [&](const json &reply) {
            fv.taxonomy = binary_field(reply, "taxonomy");
            fv.prisma = binary_field(reply, "prisma");
            return 0;
        });
    }
    if (!trim(toc_text).empty()) {
        const auto request = json_request(
            "feature_toc",
            "From the table of contents below, decide: preliminary = 1 if there is a section on preliminaries or "
            "background concepts; application = 1 if there is a section on applications; discussion = 1 if there is a "
            "section discussing challenges, open problems or future directions. Reply as {\"preliminary\": 0|1, "
            "\"application\": 0|1, \"discussion\": 0|1}.",
            heading + "Table of contents:\n" + toc_text, {{"toc", toc_text}});
        complete_json(llm, request, [&](const json &reply) {
            fv.preliminary = binary_field(reply, "preliminary");
            fv.application = binary_field(reply, "application");
            fv.discussion = binary_field(reply, "discussion");
            return 0;
        });
    }
    std::vector<std::string> all_captions = captions.figures;
    all_captions.insert(all_captions.end(), captions.tables.begin(), captions.tables.end());
    if (!all_captions.empty()) {
        const std::string caption_text = join(all_captions, "\n");
        const auto request = json_request(
            "feature_benchmark",
            "From the figure and table captions below, decide: benchmark = 1 if the review compares the performance "
            "of methods on benchmarks or datasets. Reply as {\"benchmark\": 0|1}.",
            heading + "Captions:\n" + caption_text, {{"captions", caption_text}});
        fv.benchmark = complete_json(llm, request, [](const json &reply) { return binary_field(reply, "benchmark"); });
    }
    if (!trim(abstract).empty()) {
        const auto request = json_request(
            "feature_structured_abstract",
            "Decide whether the abstract below is a structured abstract, i.e. divided into labeled parts such as "
            "Background, Methods, Results and Conclusions. Reply as {\"structured_abstract\": 0|1}.",
            heading + "Abstract:\n" + abstract, {{"abstract", abstract}});
        fv.structured_abstract =
            complete_json(llm, request, [](const json &reply) { return binary_field(reply, "structured_abstract"); });
    }
    snapshot::validate(fv);
    return fv;
}

std::vector<KeywordPositions> section_positions(const std::vector<std::string> &section_titles,
                                                const std::vector<std::string> &keywords) {
    std::vector<KeywordPositions> out;
    std::set<std::string> seen;
    for (const auto &k : keywords) {
        const std::string key = lower(trim(k));
        if (key.empty() || !seen.insert(key).second)
            continue;
        out.push_back({key, {}});
    }
    const std::size_t n = section_titles.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::string title = lower(section_titles[i]);
        const double position = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        for (auto &entry : out)
            if (title.find(entry.keyword) != std::string::npos)
                entry.positions.push_back(position);
    }
    return out;
}

std::string StructuredDocument::body_text() const {
    std::vector<std::string> parts;
    for (const auto &s : sections)
        parts.push_back(s.title + "\n" + s.body);
    return join(parts, "\n");
}

std::string StructuredDocument::introduction() const {
    for (const auto &s : sections)
        if (lower(s.title).find("introduction") != std::string::npos)
            return s.body;
    return sections.empty() ? std::string{} : sections.front().body;
}

std::vector<std::string> StructuredDocument::section_titles() const {
    std::vector<std::string> titles;
    for (const auto &s : sections)
        titles.push_back(s.title);
    return titles;
}

StructuredDocument parse_structured_text(const std::string &text) {
    enum class Block { None, Abstract, Toc, Section };
    StructuredDocument doc;
    Block block = Block::None;
    std::vector<std::string> abstract_lines;
    std::vector<std::string> body_lines;
    const auto close_section = [&] {
        if (block == Block::Section) {
            while (!body_lines.empty() && trim(body_lines.back()).empty())
                body_lines.pop_back();
            doc.sections.back().body = join(body_lines, "\n");
            body_lines.clear();
        }
    };
    std::istringstream in(text);
    std::size_t number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.rfind("# TITLE:", 0) == 0) {
            close_section();
            doc.title = trim(line.substr(8));
            block = Block::None;
        } else if (trim(line) == "# ABSTRACT") {
            close_section();
            block = Block::Abstract;
        } else if (trim(line) == "# TOC") {
            close_section();
            block = Block::Toc;
        } else if (line.rfind("# SECTION:", 0) == 0) {
            close_section();
            doc.sections.push_back({trim(line.substr(10)), {}});
            block = Block::Section;
        } else if (block == Block::Abstract) {
            abstract_lines.push_back(line);
        } else if (block == Block::Toc) {
            if (!trim(line).empty())
                doc.toc.push_back(trim(line));
        } else if (block == Block::Section) {
            if (!body_lines.empty() || !trim(line).empty())
                body_lines.push_back(line);
        } else if (!trim(line).empty()) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(number) + " is outside any block");
        }
    }
    close_section();
    std::vector<std::string> kept;
    for (const auto &l : abstract_lines)
        if (!trim(l).empty())
            kept.push_back(trim(l));
    doc.abstract = join(kept, "\n");
    return doc;
}

DocumentAnalysis analyze_document(const StructuredDocument &doc, LlmClient &llm) {
    DocumentAnalysis out;
    const std::string body = doc.body_text();
    out.word_count = count_words(body);
    const auto chunks = chunk_text(body);
    out.chunk_count = chunks.size();
    const auto caption_chunks = filter_caption_chunks(chunks);
    out.caption_chunk_count = caption_chunks.size();
    out.captions = extract_captions(caption_chunks, llm);
    const auto toc = doc.toc.empty() ? doc.section_titles() : doc.toc;
    out.features = extract_features(doc.title, doc.abstract, doc.introduction(), toc, out.captions, llm);
    return out;
}

void register_stub_handlers(retrieval::StubLlmClient &stub) {
    stub.set_handler("caption_extraction", [](const ChatRequest &request, const json &) {
        json reply{{"figures", json::array()}, {"tables", json::array()}};
        std::istringstream in(input(request, "chunk"));
        for (std::string line; std::getline(in, line);) {
            std::smatch m;
            if (!std::regex_search(line, m, caption_line()))
                continue;
            const bool figure = lower(m[1].str()).rfind("fig", 0) == 0;
            reply[figure ? "figures" : "tables"].push_back(trim(line));
        }
        return reply.dump();
    });
    stub.set_handler("feature_taxonomy_prisma", [](const ChatRequest &request, const json &table) {
        const std::string text = input(request, "intro") + "\n" + input(request, "toc");
        return json{{"taxonomy", mentions_any(text, cues_for(table, "taxonomy"))},
                    {"prisma", mentions_any(text, cues_for(table, "prisma"))}}
            .dump();
    });
    stub.set_handler("feature_toc", [](const ChatRequest &request, const json &table) {
        const std::string toc = input(request, "toc");
        return json{{"preliminary", mentions_any(toc, cues_for(table, "preliminary"))},
                    {"application", mentions_any(toc, cues_for(table, "application"))},
                    {"discussion", mentions_any(toc, cues_for(table, "discussion"))}}
            .dump();
    });
    stub.set_handler("feature_benchmark", [](const ChatRequest &request, const json &table) {
        return json{{"benchmark", mentions_any(input(request, "captions"), cues_for(table, "benchmark"))}}.dump();
    });
    stub.set_handler("feature_structured_abstract", [](const ChatRequest &request, const json &) {
        return json{{"structured_abstract", structured_abstract_stub(input(request, "abstract"))}}.dump();
    });
}

} // namespace revmetrics::extraction
