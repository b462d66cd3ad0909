#include "revmetrics/retrieval/transport.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "revmetrics/error.hpp"

namespace revmetrics::retrieval {

HttpResponse OfflineTransport::send(const HttpRequest &request) {
    throw Error(ErrorKind::NetworkError, "offline mode forbids " + request.method + " " + request.url);
}

std::shared_ptr<FixtureTransport> FixtureTransport::load(const std::filesystem::path &path) {
    auto transport = std::make_shared<FixtureTransport>();
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(path)) {
        for (const auto &entry : std::filesystem::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".ndjson")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else if (std::filesystem::is_regular_file(path)) {
        files.push_back(path);
    } else {
        throw Error(ErrorKind::InvalidArgument, "fixture path not found: " + path.string());
    }
    for (const auto &file : files) {
        std::ifstream in(file);
        if (!in)
            throw Error(ErrorKind::InvalidArgument, "cannot read fixture file " + file.string());
        transport->add_ndjson(in, file.filename().string());
    }
    return transport;
}

void FixtureTransport::add(const HttpRequest &request, HttpResponse response) {
    std::lock_guard lock(mutex_);
    exchanges_[request.key()] = std::move(response);
}

void FixtureTransport::add_ndjson(std::istream &in, const std::string &source_name) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            HttpRequest req;
            req.method = j.at("request").value("method", std::string("GET"));
            req.url = j.at("request").at("url").get<std::string>();
            req.body = j.at("request").value("body", std::string{});
            HttpResponse resp;
            resp.status = j.at("response").value("status", 200);
            const auto &body = j.at("response").at("body");
            resp.body = body.is_string() ? body.get<std::string>() : body.dump();
            add(req, std::move(resp));
        } catch (const nlohmann::json::exception &e) {
            throw Error(ErrorKind::ParseError,
                        source_name + ":" + std::to_string(line_no) + ": bad fixture line: " + e.what());
        }
    }
}

std::size_t FixtureTransport::size() const {
    std::lock_guard lock(mutex_);
    return exchanges_.size();
}

HttpResponse FixtureTransport::send(const HttpRequest &request) {
    std::lock_guard lock(mutex_);
    const auto it = exchanges_.find(request.key());
    if (it == exchanges_.end())
        throw Error(ErrorKind::NetworkError, "no recorded response for " + request.method + " " + request.url);
    return it->second;
}

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner, const std::filesystem::path &output)
    : inner_(std::move(inner)), out_(output, std::ios::app) {
    if (!out_)
        throw Error(ErrorKind::InvalidArgument, "cannot open recording file " + output.string());
}

HttpResponse RecordingTransport::send(const HttpRequest &request) {
    HttpResponse response = inner_->send(request);
    nlohmann::json line;
    line["request"] = {{"method", request.method}, {"url", request.url}, {"body", request.body}};
    line["response"] = {{"status", response.status}, {"body", response.body}};
    std::lock_guard lock(mutex_);
    out_ << line.dump() << '\n';
    out_.flush();
    return response;
}

CountingTransport::CountingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}

HttpResponse CountingTransport::send(const HttpRequest &request) {
    {
        std::lock_guard lock(mutex_);
        timestamps_.push_back(std::chrono::steady_clock::now());
        urls_.push_back(request.url);
    }
    ++count_;
    return inner_->send(request);
}

std::vector<std::chrono::steady_clock::time_point> CountingTransport::timestamps() const {
    std::lock_guard lock(mutex_);
    return timestamps_;
}

std::vector<std::string> CountingTransport::urls() const {
    std::lock_guard lock(mutex_);
    return urls_;
}

std::string url_encode(std::string_view text) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(text.size() * 3);
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(ch);
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0x0F]);
        }
    }
    return out;
}

UrlParts split_url(const std::string &url) {
    UrlParts parts;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorKind::InvalidArgument, "URL without scheme: " + url);
    parts.scheme = url.substr(0, scheme_end);
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    std::string authority = url.substr(host_start, path_start == std::string::npos ? std::string::npos
                                                                                   : path_start - host_start);
    parts.path_and_query = path_start == std::string::npos ? "/" : url.substr(path_start);
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        parts.host = authority.substr(0, colon);
        parts.port = std::stoi(authority.substr(colon + 1));
    } else {
        parts.host = authority;
        parts.port = parts.scheme == "https" ? 443 : 80;
    }
    return parts;
}

} // namespace revmetrics::retrieval
