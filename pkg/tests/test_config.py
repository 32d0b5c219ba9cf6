import os
import tempfile
import unittest
from unittest import mock

from loguru import logger

from src.config import Settings, configure_logging, get_settings
from src.errors import ConfigError


class TestSettings(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.missing_env = os.path.join(self.tmp.name, 'none.env')

    def test_defaults(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(get_settings(self.missing_env), Settings())

    def test_environment_overrides(self):
        env = {'MEANSCALE_SEED': '7', 'MEANSCALE_TRIALS': '50', 'MEANSCALE_WORKERS': '3',
               'MEANSCALE_P': '2.5', 'MEANSCALE_LOG_LEVEL': 'debug'}
        with mock.patch.dict(os.environ, env, clear=True):
            settings = get_settings(self.missing_env)
        self.assertEqual(settings, Settings(log_level='DEBUG', seed=7, trials=50, workers=3, p=2.5))

    def test_dotenv_file(self):
        path = os.path.join(self.tmp.name, '.env')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write('MEANSCALE_SEED=11\nMEANSCALE_TRIALS=20\n')
        with mock.patch.dict(os.environ, {'MEANSCALE_TRIALS': '30'}, clear=True):
            settings = get_settings(path)
        self.assertEqual(settings.seed, 11)
        self.assertEqual(settings.trials, 30)

    def test_invalid_values(self):
        for env in ({'MEANSCALE_SEED': 'abc'}, {'MEANSCALE_TRIALS': '0'}, {'MEANSCALE_WORKERS': '-1'},
                    {'MEANSCALE_P': '0'}, {'MEANSCALE_LOG_LEVEL': 'LOUD'}):
            with self.subTest(env=env):
                with mock.patch.dict(os.environ, env, clear=True):
                    with self.assertRaises(ConfigError):
                        get_settings(self.missing_env)


class TestLogging(unittest.TestCase):

    def test_level_filters_messages(self):
        configure_logging('WARNING')
        messages = []
        sink = logger.add(messages.append, level='WARNING')
        try:
            logger.info('hidden')
            logger.warning('shown')
        finally:
            logger.remove(sink)
            configure_logging()
        self.assertEqual(len(messages), 1)
        self.assertIn('shown', messages[0])


if __name__ == '__main__':
    unittest.main()
