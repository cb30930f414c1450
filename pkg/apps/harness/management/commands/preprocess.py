"""
Clean a raw eye-tracking stream and resample it into model features.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from apps.core.commands import LabCommand
from apps.core.exceptions import DataError
from apps.eyeprep.pipeline import preprocess_stream
from apps.eyeprep.simulate import simulate_fixation_frames, simulate_raw_stream
from apps.eyeprep.stream import RawEyeStream
from apps.harness.reporting import write_json


class Command(LabCommand):
    help = 'Preprocess a raw eye stream (blinks, saccades, dropouts, pupil fluctuation, gaze time)'

    def add_lab_arguments(self, parser):
        parser.add_argument('--input', default=None, help='Raw stream CSV; a seeded stream is simulated if omitted')
        parser.add_argument('--fixations', default=None, help='Fixation-frame CSV (timestamp_ms plus grid cells)')
        parser.add_argument('--target-len', type=int, default=32, help='Eye-movement frames after resampling')
        parser.add_argument('--fixation-len', type=int, default=32, help='Fixation frames after resampling')
        parser.add_argument('--detector', default=None, help='events, dropout or union (default: EYEPREP_BLINK_DETECTOR)')

    def run(self, **options):
        if options['input']:
            if not Path(options['input']).is_file():
                raise DataError(f"raw stream not found: {options['input']}")
            stream = RawEyeStream.read_csv(options['input'])
            fixations = None
            if options['fixations']:
                try:
                    fixations = pd.read_csv(options['fixations'])
                except (OSError, pd.errors.ParserError) as exc:
                    raise DataError(f"cannot read fixation frames: {exc}") from exc
        else:
            stream = simulate_raw_stream(dropout_rate=0.02, seed=self.seed)
            fixations = simulate_fixation_frames(stream)

        result = preprocess_stream(
            stream,
            target_len=options['target_len'],
            fixations=fixations,
            fixation_len=options['fixation_len'],
            detector=options['detector'],
        )
        result.cleaned.to_csv(self.out_dir / 'cleaned_stream.csv')
        arrays = {'eyemove': result.eyemove}
        if result.fixation is not None:
            arrays['fixation'] = result.fixation
        np.savez(self.out_dir / 'eye_features.npz', **arrays)
        write_json(result.report, self.out_dir / 'preprocess_report.json')
        self.stdout.write(self.style.SUCCESS(
            f"Cleaned {result.report['records']} records ({result.report['invalid_blinks']} invalid blinks) "
            f"into {self.out_dir}"
        ))
