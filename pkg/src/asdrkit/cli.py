"""Command-line surface and config-driven pipeline runner.

Subcommands mirror the pipeline stages: score-der / score-cer /
score-cpcer, post-process, cluster, fuse-rttm, fuse-text, simulate
(gen | corrupt | gen-text | corrupt-text | gen-embeddings) and run.

Exit codes: 0 success, 1 when a requested metric is undefined (no
reference mass), 2 on input or parse errors; parse failures are reported
as ``file:line: reason``.  ``ASDRKIT_THREADS`` caps multi-recording
scoring parallelism.  Reports are written as JSON carrying full-precision
numbers; the printed text rounds to two decimals.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .cer import cer as score_cer
from .cer import cpcer as score_cpcer
from .der import absolute_reduction, compute_der_corpus
from .dover import fuse, make_ranked
from .formats import (
    ParseError,
    TranscriptSet,
    emit_embeddings,
    emit_posteriors,
    emit_rttm,
    emit_transcripts,
    parse_embeddings,
    parse_posteriors,
    parse_rttm,
    parse_transcripts,
    parse_uem,
)
from .nmesc import labels_to_annotation, nmesc_cluster
from .rover import fuse_transcripts
from .simulate import (
    ConversationSpec,
    CorruptionSpec,
    corrupt_annotation,
    corrupt_transcript,
    gen_conversation,
    gen_embeddings,
    gen_transcript_corpus,
    indicator_posteriors,
)
from .timeline import TICKS_PER_SECOND, canonicalize
from .tsvad import PostProcessConfig, posteriors_to_annotation


class CliError(Exception):
    """User-facing input error; printed to stderr, exit status 2."""


def _max_workers() -> int:
    env = os.environ.get("ASDRKIT_THREADS", "").strip()
    if env:
        try:
            value = int(env)
        except ValueError:
            raise CliError(f"ASDRKIT_THREADS must be an integer, got {env!r}")
        if value < 1:
            raise CliError("ASDRKIT_THREADS must be >= 1")
        return value
    return min(8, os.cpu_count() or 1)


def _read_file(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None


def _parse_file(path, parser):
    text = _read_file(path)
    try:
        return parser(text)
    except ParseError as exc:
        line = exc.line if exc.line is not None else "?"
        raise CliError(f"{path}:{line}: {exc.reason}") from None


def _write_file(path, text: str) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _dump_json(payload) -> str:
    return json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n"


def _pct(ratio: float) -> str:
    return f"{100.0 * ratio:.2f}%"


# ---------------------------------------------------------------------------
# scoring commands
# ---------------------------------------------------------------------------


def _der_payload(per_rec, overall, collar, score_overlap) -> dict:
    return {
        "metric": "DER",
        "collar": collar,
        "score_overlap": score_overlap,
        "overall": {
            "der": overall.der,
            "scored_speech": overall.scored_speech,
            "missed": overall.missed,
            "false_alarm": overall.false_alarm,
            "confusion": overall.confusion,
        },
        "recordings": {
            rec: {
                "der": rep.der,
                "scored_speech": rep.scored_speech,
                "missed": rep.missed,
                "false_alarm": rep.false_alarm,
                "confusion": rep.confusion,
                "speaker_map": rep.speaker_map,
            }
            for rec, rep in per_rec.items()
        },
    }


def _cmd_score_der(args) -> int:
    refs = _parse_file(args.ref, parse_rttm)
    hyps = _parse_file(args.hyp, parse_rttm)
    regions = _parse_file(args.uem, parse_uem) if args.uem else None
    per_rec, overall = compute_der_corpus(
        refs,
        hyps,
        collar=args.collar,
        regions=regions,
        score_overlap=not args.no_overlap,
        max_workers=_max_workers(),
    )
    for rec in sorted(per_rec):
        rep = per_rec[rec]
        value = "undefined" if rep.der is None else _pct(rep.der)
        print(
            f"{rec} DER {value} (scored {rep.scored_speech:.2f} s, "
            f"miss {rep.missed:.2f}, fa {rep.false_alarm:.2f}, conf {rep.confusion:.2f})"
        )
    if args.report:
        _write_file(
            args.report,
            _dump_json(_der_payload(per_rec, overall, args.collar, not args.no_overlap)),
        )
    if overall.der is None:
        print("OVERALL DER undefined (no scored reference speech)")
        return 1
    print(
        f"OVERALL DER {_pct(overall.der)} (scored {overall.scored_speech:.2f} s, "
        f"miss {overall.missed:.2f}, fa {overall.false_alarm:.2f}, "
        f"conf {overall.confusion:.2f})"
    )
    return 0


def _counts_dict(counts) -> dict:
    return {
        "substitutions": counts.substitutions,
        "deletions": counts.deletions,
        "insertions": counts.insertions,
        "ref_len": counts.ref_len,
        "rate": counts.rate,
    }


def _cmd_score_cer(args) -> int:
    ref = _parse_file(args.ref, parse_transcripts)
    hyp = _parse_file(args.hyp, parse_transcripts)
    report = score_cer(ref, hyp, unit=args.unit)
    payload = {"metric": "CER", "unit": args.unit, "overall": _counts_dict(report.counts)}
    if args.report:
        _write_file(args.report, _dump_json(payload))
    c = report.counts
    if report.rate is None:
        print("CER undefined (empty reference)")
        return 1
    print(
        f"CER {_pct(report.rate)} "
        f"(S {c.substitutions}, D {c.deletions}, I {c.insertions}, ref {c.ref_len})"
    )
    return 0


def _cmd_score_cpcer(args) -> int:
    ref = _parse_file(args.ref, parse_transcripts)
    hyp = _parse_file(args.hyp, parse_transcripts)
    report = score_cpcer(ref, hyp, unit=args.unit)
    payload = {
        "metric": "cpCER",
        "unit": args.unit,
        "overall": _counts_dict(report.counts),
        "recordings": {
            rec: {
                "assignment": {r: h for r, h in rr.assignment},
                "counts": _counts_dict(rr.counts),
            }
            for rec, rr in report.per_recording.items()
        },
    }
    if args.report:
        _write_file(args.report, _dump_json(payload))
    for rec in sorted(report.per_recording):
        rr = report.per_recording[rec]
        value = "undefined" if rr.counts.rate is None else _pct(rr.counts.rate)
        pairs = " ".join(f"{r}->{h}" for r, h in rr.assignment)
        print(f"{rec} cpCER {value} [{pairs}]")
    if report.rate is None:
        print("OVERALL cpCER undefined (empty reference)")
        return 1
    print(f"OVERALL cpCER {_pct(report.rate)}")
    return 0


# ---------------------------------------------------------------------------
# transformation commands
# ---------------------------------------------------------------------------


def _post_config(args) -> PostProcessConfig:
    try:
        return PostProcessConfig(
            median_window=args.median_window,
            onset_threshold=args.onset,
            offset_threshold=args.offset,
            min_speech=args.min_speech,
            min_silence=args.min_silence,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _cmd_post_process(args) -> int:
    posteriors = _parse_file(args.posteriors, parse_posteriors)
    ann = posteriors_to_annotation(posteriors, _post_config(args))
    _write_file(args.out, emit_rttm(ann))
    print(f"{args.out}: {len(ann)} segments for {posteriors.recording}")
    return 0


def _cmd_cluster(args) -> int:
    embeddings = _parse_file(args.embeddings, parse_embeddings)
    try:
        labels, nme = nmesc_cluster(
            embeddings, max_speakers=args.max_speakers, seed=args.seed
        )
    except ValueError as exc:
        raise CliError(f"{args.embeddings}: {exc}") from None
    ann = labels_to_annotation(embeddings, labels)
    _write_file(args.out, emit_rttm(ann))
    if args.labels_out:
        lines = [
            f"{on / TICKS_PER_SECOND:.4f}\t{off / TICKS_PER_SECOND:.4f}\t{int(lab)}"
            for (on, off), lab in zip(embeddings.windows, labels)
        ]
        _write_file(args.labels_out, "".join(line + "\n" for line in lines))
    if args.nme_out:
        _write_file(
            args.nme_out,
            _dump_json(
                {
                    "best_p": nme.best_p,
                    "est_speakers": nme.est_speakers,
                    "values": [list(v) for v in nme.nme_values],
                }
            ),
        )
    print(f"estimated {nme.est_speakers} speakers (best p {nme.best_p})")
    return 0


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"bad {what} list: {text!r}") from None


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"bad {what} list: {text!r}") from None


def _fuse_rttm_maps(hyp_maps, ranks, weights, exponent):
    recordings = sorted({rec for anns in hyp_maps for rec in anns})
    fused = {}
    for rec in recordings:
        anns = [m.get(rec) or canonicalize([], recording=rec) for m in hyp_maps]
        try:
            ranked = make_ranked(anns, ranks=ranks, weights=weights, exponent=exponent)
            fused[rec] = fuse(ranked)
        except ValueError as exc:
            raise CliError(f"fusing {rec}: {exc}") from None
    return fused


def _cmd_fuse_rttm(args) -> int:
    if len(args.hyps) < 1:
        raise CliError("need at least one hypothesis RTTM")
    hyp_maps = [_parse_file(path, parse_rttm) for path in args.hyps]
    ranks = _parse_int_list(args.ranks, "ranks") if args.ranks else None
    weights = _parse_float_list(args.weights, "weights") if args.weights else None
    if ranks is not None and len(ranks) != len(hyp_maps):
        raise CliError("need one rank per hypothesis file")
    if weights is not None and len(weights) != len(hyp_maps):
        raise CliError("need one weight per hypothesis file")
    fused = _fuse_rttm_maps(hyp_maps, ranks, weights, args.exponent)
    _write_file(args.out, emit_rttm(fused))
    print(f"{args.out}: fused {len(args.hyps)} hypotheses over {len(fused)} recording(s)")
    return 0


def _cmd_fuse_text(args) -> int:
    if len(args.hyps) < 1:
        raise CliError("need at least one transcript file")
    sets = [_parse_file(path, parse_transcripts) for path in args.hyps]
    try:
        fused = fuse_transcripts(sets, alpha=args.alpha, null_conf=args.null_conf, unit=args.unit)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _write_file(args.out, emit_transcripts(fused))
    print(f"{args.out}: fused {len(sets)} systems over {len(fused.entries)} utterances")
    return 0


# ---------------------------------------------------------------------------
# simulate commands
# ---------------------------------------------------------------------------


def _cmd_sim_gen(args) -> int:
    try:
        spec = ConversationSpec(
            seed=args.seed,
            n_speakers=args.n_speakers,
            duration=args.duration,
            mean_turn=args.mean_turn,
            overlap_ratio=args.overlap_ratio,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    ann = gen_conversation(spec, recording=args.recording)
    _write_file(args.rttm, emit_rttm(ann))
    if args.posteriors:
        post = indicator_posteriors(ann, args.frame_shift)
        _write_file(args.posteriors, emit_posteriors(post))
    print(f"{args.rttm}: {len(ann)} segments, {len(ann.speakers)} speakers")
    return 0


def _corruption_spec(args) -> CorruptionSpec:
    try:
        return CorruptionSpec(
            seed=args.seed,
            boundary_jitter_sigma=getattr(args, "jitter_sigma", 0.0),
            miss_rate=getattr(args, "miss_rate", 0.0),
            false_alarm_rate=getattr(args, "fa_rate", 0.0),
            label_swap_rate=getattr(args, "label_swap_rate", 0.0),
            sub_rate=getattr(args, "sub_rate", 0.0),
            ins_rate=getattr(args, "ins_rate", 0.0),
            del_rate=getattr(args, "del_rate", 0.0),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _cmd_sim_corrupt(args) -> int:
    anns = _parse_file(args.rttm, parse_rttm)
    spec = _corruption_spec(args)
    out = {rec: corrupt_annotation(ann, spec) for rec, ann in sorted(anns.items())}
    _write_file(args.out, emit_rttm(out))
    print(f"{args.out}: corrupted {len(out)} recording(s)")
    return 0


def _cmd_sim_gen_text(args) -> int:
    ts, _ = gen_transcript_corpus(
        seed=args.seed,
        n_utterances=args.n_utterances,
        tokens_per_utterance=args.utterance_len,
        vocab_size=args.vocab_size,
        recording=args.recording,
    )
    _write_file(args.out, emit_transcripts(ts))
    print(f"{args.out}: {args.n_utterances} utterances")
    return 0


def _cmd_sim_corrupt_text(args) -> int:
    ts = _parse_file(args.transcript, parse_transcripts)
    spec = _corruption_spec(args)
    alphabet = sorted({t for tokens in ts.entries.values() for t in tokens})
    corrupted = TranscriptSet(
        {
            key: corrupt_transcript(tokens, spec, alphabet=alphabet)
            for key, tokens in sorted(ts.entries.items())
        }
    )
    _write_file(args.out, emit_transcripts(corrupted))
    print(f"{args.out}: corrupted {len(corrupted.entries)} utterances")
    return 0


def _cmd_sim_gen_embeddings(args) -> int:
    try:
        embeddings, labels = gen_embeddings(
            seed=args.seed,
            k=args.clusters,
            n_per_cluster=args.per_cluster,
            dim=args.dim,
            noise_sigma=args.noise_sigma,
            recording=args.recording,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _write_file(args.out, emit_embeddings(embeddings))
    if args.labels_out:
        _write_file(
            args.labels_out, "".join(f"{int(lab)}\n" for lab in labels)
        )
    print(f"{args.out}: {len(embeddings)} embeddings in {args.clusters} clusters")
    return 0


# ---------------------------------------------------------------------------
# pipeline runner
# ---------------------------------------------------------------------------


def _stage_digest(stage: dict, workdir: Path, input_paths: list[str]) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(stage, sort_keys=True).encode())
    for rel in input_paths:
        h.update(rel.encode())
        try:
            h.update((workdir / rel).read_bytes())
        except OSError:
            h.update(b"<missing>")
    return h.hexdigest()


_STAGE_INPUT_KEYS = ("input", "ref", "hyp", "uem", "posteriors", "embeddings")


def _stage_inputs(stage: dict) -> list[str]:
    paths = []
    for key in _STAGE_INPUT_KEYS:
        if stage.get(key):
            paths.append(stage[key])
    paths.extend(stage.get("inputs", []))
    return paths


def _stage_outputs(stage: dict) -> list[str]:
    paths = []
    for key in ("output", "rttm", "posteriors_out", "report_out"):
        if stage.get(key):
            paths.append(stage[key])
    return paths


class _Runner:
    def __init__(self, config: dict, workdir: Path, resume: bool):
        self.config = config
        self.workdir = workdir
        self.resume = resume
        self.scores: dict[str, dict] = {}
        manifest_path = workdir / "manifest.json"
        self.manifest_path = manifest_path
        self.old_manifest = {}
        if resume and manifest_path.exists():
            try:
                self.old_manifest = json.loads(manifest_path.read_text())
            except (OSError, json.JSONDecodeError):
                self.old_manifest = {}
        self.new_manifest: dict[str, str] = {}

    def path(self, rel) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.workdir / p

    def run(self) -> int:
        status = 0
        for stage in self.config.get("stages", []):
            name = stage.get("name")
            kind = stage.get("type")
            if not name or not kind:
                raise CliError("every stage needs a 'name' and a 'type'")
            digest = _stage_digest(stage, self.workdir, _stage_inputs(stage))
            outputs = _stage_outputs(stage)
            score_file = self.workdir / f"{name}.score.json"
            can_skip = (
                self.resume
                and self.old_manifest.get(name) == digest
                and all(self.path(p).exists() for p in outputs)
                and (not kind.startswith("score-") or score_file.exists())
            )
            if can_skip:
                if kind.startswith("score-"):
                    self.scores[stage.get("label", name)] = json.loads(
                        score_file.read_text()
                    )
                print(f"[skip] {name}")
            else:
                print(f"[run ] {name} ({kind})")
                status = max(status, self._dispatch(kind, stage, name))
            self.new_manifest[name] = digest
        self.manifest_path.parent.mkdir(parents=True, exist_ok=True)
        self.manifest_path.write_text(_dump_json(self.new_manifest))
        return status

    def _dispatch(self, kind: str, stage: dict, name: str) -> int:
        handlers = {
            "simulate-gen": self._stage_sim_gen,
            "simulate-corrupt": self._stage_sim_corrupt,
            "post-process": self._stage_post_process,
            "cluster": self._stage_cluster,
            "fuse-rttm": self._stage_fuse_rttm,
            "fuse-text": self._stage_fuse_text,
            "score-der": self._stage_score_der,
            "score-cer": self._stage_score_cer,
            "score-cpcer": self._stage_score_cpcer,
            "report": self._stage_report,
        }
        if kind not in handlers:
            raise CliError(f"stage {name!r}: unknown type {kind!r}")
        try:
            return handlers[kind](stage, name)
        except KeyError as exc:
            raise CliError(f"stage {name!r}: missing parameter {exc}") from None
        except ValueError as exc:
            raise CliError(f"stage {name!r}: {exc}") from None

    def _stage_sim_gen(self, stage, name) -> int:
        spec = ConversationSpec(
            seed=int(stage["seed"]),
            n_speakers=int(stage["n_speakers"]),
            duration=float(stage["duration"]),
            mean_turn=float(stage.get("mean_turn", 2.0)),
            overlap_ratio=float(stage.get("overlap_ratio", 0.0)),
        )
        ann = gen_conversation(spec, recording=stage.get("recording", "sim"))
        _write_file(self.path(stage["rttm"]), emit_rttm(ann))
        if stage.get("posteriors_out"):
            post = indicator_posteriors(ann, float(stage.get("frame_shift", 0.01)))
            _write_file(self.path(stage["posteriors_out"]), emit_posteriors(post))
        return 0

    def _stage_sim_corrupt(self, stage, name) -> int:
        anns = _parse_file(self.path(stage["input"]), parse_rttm)
        spec = CorruptionSpec(
            seed=int(stage["seed"]),
            boundary_jitter_sigma=float(stage.get("boundary_jitter_sigma", 0.0)),
            miss_rate=float(stage.get("miss_rate", 0.0)),
            false_alarm_rate=float(stage.get("false_alarm_rate", 0.0)),
            label_swap_rate=float(stage.get("label_swap_rate", 0.0)),
        )
        out = {rec: corrupt_annotation(a, spec) for rec, a in sorted(anns.items())}
        _write_file(self.path(stage["output"]), emit_rttm(out))
        return 0

    def _stage_post_process(self, stage, name) -> int:
        posteriors = _parse_file(self.path(stage["posteriors"]), parse_posteriors)
        cfg_args = stage.get("config", {})
        cfg = PostProcessConfig(**cfg_args)
        ann = posteriors_to_annotation(posteriors, cfg)
        _write_file(self.path(stage["output"]), emit_rttm(ann))
        return 0

    def _stage_cluster(self, stage, name) -> int:
        embeddings = _parse_file(self.path(stage["embeddings"]), parse_embeddings)
        labels, _ = nmesc_cluster(
            embeddings,
            max_speakers=int(stage.get("max_speakers", 4)),
            seed=int(stage.get("seed", 0)),
        )
        ann = labels_to_annotation(embeddings, labels)
        _write_file(self.path(stage["output"]), emit_rttm(ann))
        return 0

    def _stage_fuse_rttm(self, stage, name) -> int:
        hyp_maps = [_parse_file(self.path(p), parse_rttm) for p in stage["inputs"]]
        fused = _fuse_rttm_maps(
            hyp_maps,
            stage.get("ranks"),
            stage.get("weights"),
            float(stage.get("exponent", 0.5)),
        )
        _write_file(self.path(stage["output"]), emit_rttm(fused))
        return 0

    def _stage_fuse_text(self, stage, name) -> int:
        sets = [_parse_file(self.path(p), parse_transcripts) for p in stage["inputs"]]
        fused = fuse_transcripts(
            sets,
            alpha=float(stage.get("alpha", 1.0)),
            null_conf=float(stage.get("null_conf", 0.7)),
            unit=stage.get("unit", "char"),
        )
        _write_file(self.path(stage["output"]), emit_transcripts(fused))
        return 0

    def _save_score(self, stage, name, payload) -> None:
        label = stage.get("label", name)
        self.scores[label] = payload
        _write_file(self.workdir / f"{name}.score.json", _dump_json(payload))

    def _stage_score_der(self, stage, name) -> int:
        refs = _parse_file(self.path(stage["ref"]), parse_rttm)
        hyps = _parse_file(self.path(stage["hyp"]), parse_rttm)
        regions = (
            _parse_file(self.path(stage["uem"]), parse_uem) if stage.get("uem") else None
        )
        per_rec, overall = compute_der_corpus(
            refs,
            hyps,
            collar=float(stage.get("collar", 0.25)),
            regions=regions,
            score_overlap=bool(stage.get("score_overlap", True)),
            max_workers=_max_workers(),
        )
        payload = _der_payload(
            per_rec, overall, float(stage.get("collar", 0.25)),
            bool(stage.get("score_overlap", True)),
        )
        payload["value"] = overall.der
        self._save_score(stage, name, payload)
        return 0 if overall.der is not None else 1

    def _stage_score_cer(self, stage, name) -> int:
        ref = _parse_file(self.path(stage["ref"]), parse_transcripts)
        hyp = _parse_file(self.path(stage["hyp"]), parse_transcripts)
        report = score_cer(ref, hyp, unit=stage.get("unit", "char"))
        payload = {
            "metric": "CER",
            "overall": _counts_dict(report.counts),
            "value": report.rate,
        }
        self._save_score(stage, name, payload)
        return 0 if report.rate is not None else 1

    def _stage_score_cpcer(self, stage, name) -> int:
        ref = _parse_file(self.path(stage["ref"]), parse_transcripts)
        hyp = _parse_file(self.path(stage["hyp"]), parse_transcripts)
        report = score_cpcer(ref, hyp, unit=stage.get("unit", "char"))
        payload = {
            "metric": "cpCER",
            "overall": _counts_dict(report.counts),
            "value": report.rate,
        }
        self._save_score(stage, name, payload)
        return 0 if report.rate is not None else 1

    def _stage_report(self, stage, name) -> int:
        rows = stage.get("rows", sorted(self.scores))
        missing = [label for label in rows if label not in self.scores]
        if missing:
            raise CliError(f"report stage: no scores named {', '.join(missing)}")
        lines = [f"{'System':<16} {stage.get('metric', 'DER')}"]
        table = []
        for label in rows:
            score = self.scores[label]
            value = score.get("value")
            percent = None if value is None else round(100.0 * value, 2)
            shown = "undefined" if percent is None else f"{percent:.2f}%"
            lines.append(f"{label:<16} {shown}")
            table.append(
                {"label": label, "metric": score.get("metric"), "value": value,
                 "percent": percent}
            )
        reductions = []
        baseline = stage.get("baseline")
        if baseline is not None:
            base_row = next((r for r in table if r["label"] == baseline), None)
            if base_row is None:
                raise CliError(f"report stage: baseline {baseline!r} not among rows")
            for row in table:
                if row["label"] == baseline:
                    continue
                if base_row["percent"] is None or row["percent"] is None:
                    continue
                delta = absolute_reduction(base_row["percent"], row["percent"])
                lines.append(
                    f"absolute reduction ({baseline} -> {row['label']}): {delta:.2f}"
                )
                reductions.append(
                    {
                        "baseline": baseline,
                        "system": row["label"],
                        "baseline_percent": base_row["percent"],
                        "system_percent": row["percent"],
                        "absolute_reduction": delta,
                    }
                )
        text = "".join(line + "\n" for line in lines)
        print(text, end="")
        payload = {"rows": table, "reductions": reductions}
        if stage.get("output"):
            _write_file(self.path(stage["output"]), _dump_json(payload))
        if stage.get("text_output"):
            _write_file(self.path(stage["text_output"]), text)
        return 0


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    try:
        config = json.loads(_read_file(config_path))
    except json.JSONDecodeError as exc:
        raise CliError(f"{config_path}:{exc.lineno}: {exc.msg}") from None
    workdir = Path(args.workdir) if args.workdir else Path(config.get("workdir", "out"))
    if not workdir.is_absolute():
        workdir = Path.cwd() / workdir
    workdir.mkdir(parents=True, exist_ok=True)
    return _Runner(config, workdir, args.resume).run()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asdrkit",
        description="Scoring and fusion toolkit for multi-speaker diarization + ASR.",
    )
    parser.add_argument("--version", action="version", version=f"asdrkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score-der", help="diarization error rate between two RTTMs")
    p.add_argument("--ref", required=True, help="reference RTTM")
    p.add_argument("--hyp", required=True, help="hypothesis RTTM")
    p.add_argument("--collar", type=float, default=0.25)
    p.add_argument("--uem", help="scoring regions (UEM)")
    p.add_argument("--no-overlap", action="store_true",
                   help="exclude intervals with overlapped reference speech")
    p.add_argument("--report", help="write full-precision JSON report here")
    p.set_defaults(func=_cmd_score_der)

    for cmd, fn in (("score-cer", _cmd_score_cer), ("score-cpcer", _cmd_score_cpcer)):
        p = sub.add_parser(cmd, help=f"{cmd.split('-')[1].upper()} between transcripts")
        p.add_argument("--ref", required=True)
        p.add_argument("--hyp", required=True)
        p.add_argument("--unit", choices=("char", "token"), default="char")
        p.add_argument("--report")
        p.set_defaults(func=fn)

    p = sub.add_parser("post-process", help="posteriors -> RTTM segments")
    p.add_argument("--posteriors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--median-window", type=int, default=11)
    p.add_argument("--onset", type=float, default=0.5)
    p.add_argument("--offset", type=float, default=0.5)
    p.add_argument("--min-speech", type=float, default=0.2)
    p.add_argument("--min-silence", type=float, default=0.3)
    p.set_defaults(func=_cmd_post_process)

    p = sub.add_parser("cluster", help="NME-SC speaker clustering of embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True, help="output RTTM")
    p.add_argument("--max-speakers", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels-out", help="optional 'onset offset label' TSV")
    p.add_argument("--nme-out", help="optional NME tuning dump (JSON)")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("fuse-rttm", help="DOVER-Lap style diarization fusion")
    p.add_argument("hyps", nargs="+", help="hypothesis RTTMs, best first")
    p.add_argument("--out", required=True)
    p.add_argument("--ranks", help="comma-separated ranks, e.g. 1,2,3")
    p.add_argument("--weights", help="comma-separated weights (override ranks)")
    p.add_argument("--exponent", type=float, default=0.5,
                   help="rank weighting exponent; 0 = uniform")
    p.set_defaults(func=_cmd_fuse_rttm)

    p = sub.add_parser("fuse-text", help="ROVER transcript fusion")
    p.add_argument("hyps", nargs="+", help="transcript files, best first")
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--null-conf", type=float, default=0.7)
    p.add_argument("--unit", choices=("char", "token"), default="char")
    p.set_defaults(func=_cmd_fuse_text)

    sim = sub.add_parser("simulate", help="generate or corrupt fixture files")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)

    p = sim_sub.add_parser("gen", help="synthetic conversation")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-speakers", type=int, default=2)
    p.add_argument("--duration", type=float, default=300.0)
    p.add_argument("--mean-turn", type=float, default=2.0)
    p.add_argument("--overlap-ratio", type=float, default=0.0)
    p.add_argument("--recording", default="sim")
    p.add_argument("--rttm", required=True)
    p.add_argument("--posteriors", help="also write {0,1} posteriors here")
    p.add_argument("--frame-shift", type=float, default=0.01)
    p.set_defaults(func=_cmd_sim_gen)

    p = sim_sub.add_parser("corrupt", help="corrupt an RTTM")
    p.add_argument("--rttm", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jitter-sigma", type=float, default=0.0)
    p.add_argument("--miss-rate", type=float, default=0.0)
    p.add_argument("--fa-rate", type=float, default=0.0)
    p.add_argument("--label-swap-rate", type=float, default=0.0)
    p.set_defaults(func=_cmd_sim_corrupt)

    p = sim_sub.add_parser("gen-text", help="synthetic transcript corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-utterances", type=int, default=100)
    p.add_argument("--utterance-len", type=int, default=100)
    p.add_argument("--vocab-size", type=int, default=1000)
    p.add_argument("--recording", default="sim")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sim_gen_text)

    p = sim_sub.add_parser("corrupt-text", help="corrupt a transcript file")
    p.add_argument("--transcript", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sub-rate", type=float, default=0.0)
    p.add_argument("--ins-rate", type=float, default=0.0)
    p.add_argument("--del-rate", type=float, default=0.0)
    p.set_defaults(func=_cmd_sim_corrupt_text)

    p = sim_sub.add_parser("gen-embeddings", help="clustered embedding fixture")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--clusters", type=int, default=4)
    p.add_argument("--per-cluster", type=int, default=20)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--noise-sigma", type=float, default=0.05)
    p.add_argument("--recording", default="sim")
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out", help="write true labels, one per line")
    p.set_defaults(func=_cmd_sim_gen_embeddings)

    p = sub.add_parser("run", help="execute a pipeline config")
    p.add_argument("--config", required=True)
    p.add_argument("--workdir", help="override the config's workdir")
    p.add_argument("--resume", action="store_true",
                   help="skip stages whose inputs and parameters are unchanged")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
