import os
import configparser

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

this_file_path = os.path.dirname(os.path.realpath(__file__))


def check_or_create_configuration(home_dir):
    """
    Checks if orliczlab configuration exists, otherwise creates configuration.

    :param home_dir: orliczlab home directory
    :type home_dir: str
    """
    config_path = os.path.join(home_dir, 'config.ini')

    if not os.path.exists(home_dir):  # user runs for the first time
        logger.debug(f"Creating configuration folder at {home_dir}.")
        os.makedirs(home_dir)

    if not os.path.isfile(config_path):
        config = configparser.ConfigParser()
        config_template_path = os.path.join(
            this_file_path, '../templates/config_sample.ini')
        config.read(config_template_path)

        with open(config_path, 'w') as configfile:
            config.write(configfile)
        logger.debug(f'Config file was written to {config_path}.')


def report_directory(config, home_dir):
    """
    Resolves the folder for reports from the [output] section.

    :param config: parsed config.ini
    :type config: configparser.ConfigParser
    :param home_dir: orliczlab home directory
    :type home_dir: str
    :return: absolute directory path
    :rtype: str
    """
    directory = config.get('output', 'directory', fallback='reports')
    directory = os.path.expanduser(directory)
    if not os.path.isabs(directory):
        directory = os.path.join(home_dir, directory)
    return directory
