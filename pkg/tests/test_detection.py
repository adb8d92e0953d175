import pytest

from causalcps.detection import (
    constant_label_windows,
    detect_effect,
    expected_state_check,
    scan_anomalies,
)
from causalcps.distributions import ANOMALOUS, Degenerate, Normal, sample
from causalcps.model import (
    Sensor,
    Subsystem,
    SubsystemKind,
    build_model,
    causal_descendants,
    derive_causal_graph,
)
from causalcps.simulation import ScriptedIntervention, TickRecord, Trace, run_script


def synthetic_trace(values_by_sensor, labels_by_sensor):
    sensor_ids = tuple(values_by_sensor)
    n = len(next(iter(values_by_sensor.values())))
    records = tuple(
        TickRecord(
            tick=t,
            values={s: float(values_by_sensor[s][t]) for s in sensor_ids},
            labels={s: labels_by_sensor[s][t] for s in sensor_ids},
            events=(),
        )
        for t in range(n)
    )
    return Trace(sensor_ids=sensor_ids, records=records)


class TestConstantLabelWindows:
    def test_single_segment(self):
        starts = list(constant_label_windows(["X"] * 100, 50, 25))
        assert starts == [(0, "X"), (25, "X"), (50, "X")]

    def test_windows_never_straddle_a_change(self):
        labels = ["A"] * 60 + ["B"] * 80
        windows = list(constant_label_windows(labels, 50, 25))
        assert windows == [(0, "A"), (60, "B"), (85, "B")]

    def test_short_segments_yield_nothing(self):
        assert list(constant_label_windows(["A", "B"] * 30, 50, 25)) == []


class TestDetectEffect:
    def probe_model(self):
        sensors = (
            Sensor("probe", (("Lo", Normal(20, 2)), ("Hi", Normal(800, 10))), "Lo"),
            Sensor("other", (("Idle", Degenerate(0)),), "Idle"),
        )
        return build_model(
            sensors, (Subsystem("mount", SubsystemKind.COMPONENT, ("probe",), ()),)
        )

    def test_transition_is_detected(self):
        model = self.probe_model()
        trace = run_script(
            model, 0, 300, interventions=[ScriptedIntervention(150, "probe", "Hi")]
        )
        effect, result = detect_effect(trace, "probe", 150, window=50, alpha=0.01)
        assert effect
        assert result.p_value < 1e-6

    def test_no_change_not_flagged(self):
        model = self.probe_model()
        flagged = 0
        for seed in range(20):
            trace = run_script(model, seed, 200)
            effect, _ = detect_effect(trace, "probe", 100, window=50, alpha=0.01)
            flagged += effect
        assert flagged <= 1

    def test_symmetric_in_windows(self):
        model = self.probe_model()
        trace = run_script(
            model, 3, 200, interventions=[ScriptedIntervention(100, "probe", "Hi")]
        )
        values = trace.values_for("probe")
        from causalcps.distributions import two_sample_test

        assert two_sample_test(values[50:100], values[100:150]) == two_sample_test(
            values[100:150], values[50:100]
        )

    def test_window_out_of_range_rejected(self):
        model = self.probe_model()
        trace = run_script(model, 0, 80)
        with pytest.raises(ValueError, match="out of range"):
            detect_effect(trace, "probe", 20, window=50, alpha=0.01)
        with pytest.raises(ValueError, match="out of range"):
            detect_effect(trace, "probe", 60, window=50, alpha=0.01)


class TestScanAnomalies:
    def test_fault_free_knife_trace_is_clean(self, knife_doc, knife_model, knife_reference):
        report = scan_anomalies(knife_reference, knife_model)
        assert report.verdicts
        assert report.anomalous_verdicts() == []

    def test_pinned_between_states_is_anomalous(self, knife_model):
        # oven_temp stuck at ~400: between Ambient (20) and Hot (800).
        n = 120
        values = {"oven_temp": sample(Normal(400, 10), 5, n)}
        labels = {"oven_temp": ["Ambient"] * n}
        trace = synthetic_trace(values, labels)
        report = scan_anomalies(trace, knife_model)
        assert report.verdicts
        assert all(v.matched == ANOMALOUS for v in report.verdicts)

    def test_report_covers_all_windows_and_sensors(self, knife_model, knife_reference):
        report = scan_anomalies(knife_reference, knife_model)
        covered = {v.sensor for v in report.verdicts}
        assert covered == set(knife_reference.sensor_ids)
        for verdict in report.verdicts:
            assert set(verdict.p_values) == set(
                knife_model.sensor(verdict.sensor).labels()
            )
            assert verdict.length == 50 and verdict.alpha == 0.01

    def test_matched_label_survives_bonferroni_level(self, knife_model, knife_reference):
        report = scan_anomalies(knife_reference, knife_model)
        for verdict in report.verdicts:
            if not verdict.anomalous:
                level = verdict.alpha / len(verdict.p_values)
                assert verdict.p_values[verdict.matched] >= level


class TestExpectedStateCheck:
    def test_reference_against_itself_is_empty(self, knife_model, knife_reference):
        assert expected_state_check(knife_reference, knife_reference, knife_model) == []

    def test_lid_fault_deviations_cover_downstream(
        self, knife_model, knife_reference, knife_lid_fault_trace
    ):
        deviations = expected_state_check(
            knife_lid_fault_trace, knife_reference, knife_model
        )
        deviating = {d.sensor for d in deviations}
        assert deviating == {"lid_state", "oven_temp", "knife_temp", "knife_hardness"}
        oven_starts = sorted(d.start for d in deviations if d.sensor == "oven_temp")
        # Reference oven_temp is Hot on [8, 133); every window inside deviates.
        assert oven_starts == [8, 33, 58, 83]
        for d in deviations:
            if d.sensor == "oven_temp":
                assert d.expected == "Hot" and d.matched == "Ambient"

    def test_deviations_only_downstream_of_fault(
        self, knife_model, knife_reference, knife_lid_fault_trace
    ):
        graph = derive_causal_graph(knife_model)
        fault_sensors = set(knife_model.subsystem("lid_actuator").sensors)
        downstream = set(fault_sensors)
        for sensor in fault_sensors:
            downstream |= causal_descendants(graph, sensor)
        deviations = expected_state_check(
            knife_lid_fault_trace, knife_reference, knife_model
        )
        assert {d.sensor for d in deviations} <= downstream

    def test_length_mismatch_rejected(self, knife_doc, knife_model, knife_reference):
        short = knife_doc.run(horizon=100, include_faults=True)
        with pytest.raises(ValueError, match="length mismatch"):
            expected_state_check(short, knife_reference, knife_model)

    def test_sensor_set_mismatch_rejected(self, knife_model, knife_reference):
        n = len(knife_reference)
        other = synthetic_trace(
            {"oven_temp": [20.0] * n}, {"oven_temp": ["Ambient"] * n}
        )
        with pytest.raises(ValueError, match="different sensor sets"):
            expected_state_check(other, knife_reference, knife_model)

    def test_shift_flagged_within_two_windows_of_onset(self):
        sensors = (
            Sensor("probe", (("A", Normal(0, 1)), ("B", Normal(5, 1))), "A"),
            Sensor("other", (("Idle", Degenerate(0)),), "Idle"),
        )
        model = build_model(
            sensors, (Subsystem("mount", SubsystemKind.COMPONENT, ("probe",), ()),)
        )
        onset = 100
        hits = 0
        for seed in range(30):
            reference = run_script(model, seed, 300)
            shifted = run_script(
                model,
                seed + 1000,
                300,
                interventions=[ScriptedIntervention(onset, "probe", "B")],
            )
            deviations = [
                d
                for d in expected_state_check(shifted, reference, model)
                if d.sensor == "probe" and d.start + 50 > onset
            ]
            if deviations and min(d.start for d in deviations) <= onset + 2 * 25:
                hits += 1
        assert hits >= 29
